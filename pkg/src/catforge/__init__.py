"""catforge: synthesize data-aware conversational agents over relational data.

The pipeline: declare a schema and transaction tasks, ingest CSVs, generate a
weakly supervised training corpus through dialogue self-play, train the
intent/slot models, then serve a chat agent whose questions are chosen by
live per-attribute statistics instead of a fixed slot order.
"""

__version__ = "0.1.0"

from .schema import (  # noqa: F401
    Column,
    ColumnAnnotation,
    ForeignKey,
    Schema,
    SlotSpec,
    Table,
    TaskAction,
    TaskDefinition,
    annotate,
    load_schema,
    load_tasks,
    save_schema,
)
from .store import (  # noqa: F401
    CandidateSet,
    ColumnStats,
    Datastore,
    Predicate,
    TransactionResult,
    shannon_entropy_bits,
)
from .policy import (  # noqa: F401
    AwarenessModel,
    PolicyConfig,
    PolicyDecision,
    StatsCache,
    next_request,
    score_attributes,
)
from .nlu import (  # noqa: F401
    IntentModel,
    NluConfig,
    NluPipeline,
    classify,
    train_intent_classifier,
)
from .datagen import (  # noqa: F401
    DMPolicy,
    DialogueFlow,
    UtteranceTemplate,
    derive_dm_policy,
    expand_templates,
    paraphrase,
    simulate_dialogues,
)
from .engine import AgentResponse, DialogueEngine, DialogueState  # noqa: F401
from .benchmark import BenchmarkReport, StrategyStats, run_benchmark  # noqa: F401
from .config import AppConfig, load_config  # noqa: F401
from .workspace import PipelineStatus, Workspace  # noqa: F401
from .fixture import generate_fixture  # noqa: F401
