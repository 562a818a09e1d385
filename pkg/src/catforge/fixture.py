"""Ready-made workspaces: a small cinema box office for demos and tests,
and a larger synthetic customer base for the benchmark harness.

Everything here is deterministic in (scale, seed). The cinema generator
writes a complete on-disk workspace (schema, tasks, templates, lexicon,
response strings, config, CSV data); the benchmark builders return
in-memory stores since their data never needs to be inspected by hand.
"""

from __future__ import annotations

import csv
import io
import json
import random
from pathlib import Path

from .datagen import templates_from_dict
from .errors import IoError
from .schema import Schema, TaskDefinition, schema_from_dict, tasks_from_dict
from .store import Datastore

SESSION_CLOCK = "2024-06-01T18:00:00"

# -- value pools -------------------------------------------------------------------

# Imogen is reserved for the hand-placed customer C17 and excluded from the
# random draw so "Imogen Walsh" stays unique at every scale.
FIRST_NAMES = (
    "Ada", "Anton", "Bianca", "Bruno", "Camila", "Carl", "Derek", "Dora",
    "Elena", "Emil", "Felix", "Frieda", "Greta", "Gustav", "Hana", "Hugo",
    "Imogen", "Ivan", "Janne", "Jonas", "Katya", "Kira", "Liam", "Lorenzo",
    "Maria", "Mireille", "Nadia", "Nora", "Oscar", "Petra", "Quentin", "Rosa",
    "Stefan", "Talia", "Ulrich", "Vera", "Wallace", "Xenia", "Yusuf", "Zelda",
)

LAST_NAMES = (
    "Abbott", "Alvarez", "Archer", "Barnes", "Baxter", "Becker", "Bennett",
    "Berger", "Blackwood", "Bloom", "Bauer", "Brandt", "Callahan", "Calloway",
    "Carmichael", "Castillo", "Chandler", "Clarke", "Coleman", "Crawford",
    "Dalton", "Delacroix", "Dietrich", "Donnelly", "Drummond", "Eastman",
    "Eberhart", "Ellington", "Falk", "Farrell", "Fenwick", "Fischer",
    "Fleming", "Fontaine", "Forsythe", "Gallagher", "Garrett", "Godfrey",
    "Granger", "Greenwood", "Hale", "Halloran", "Harrington", "Hawthorne",
    "Healy", "Hoffman", "Holloway", "Ibarra", "Ingram", "Jacobsen",
    "Jennings", "Keller", "Kennedy", "Kirkland", "Kowalski", "Lambert",
    "Langley", "Larsen", "Lockwood", "Madsen", "Marchetti", "Mercer",
    "Meyer", "Molina", "Montgomery", "Navarro", "Nielsen", "Norwood",
    "Okafor", "Ortega", "Pemberton", "Quigley", "Radcliffe", "Ramsey",
    "Redmond", "Rhodes", "Rossi", "Salazar", "Schneider", "Sheridan",
    "Sorensen", "Stanton", "Sutherland", "Thackeray", "Underwood", "Vasquez",
    "Voss", "Walsh", "Whitfield", "Winslow",
)

# Veyrane is reserved for C17 the same way Imogen is.
CITIES = (
    "Alderbrook", "Ambleside", "Ashcombe", "Bellhaven", "Birchwood",
    "Blackpond", "Brackenfield", "Briarcliff", "Bridgewater", "Brookhollow",
    "Caldermoor", "Cedarfall", "Claymont", "Cloverdale", "Coldspring",
    "Cresthaven", "Crowthorne", "Dunmore", "Eastgate", "Eldenbrook",
    "Elmsworth", "Fairhollow", "Fallowmere", "Fernridge", "Foxbury",
    "Frostford", "Gildercrest", "Glenmarsh", "Goldenvale", "Graystone",
    "Greenford", "Harrowgate", "Hazelbrook", "Heathermoor", "Highmarsh",
    "Hollyfield", "Ironbridge", "Ivydale", "Kestrelwood", "Kingsmere",
    "Lakeshore", "Larkspur", "Lindenholm", "Maplewick", "Marshfield",
    "Mistyvale", "Moorcroft", "Netherfield", "Northgate", "Oakhampton",
    "Pebbleton", "Pinehurst", "Quarrybrook", "Ravenscroft", "Redmoor",
    "Rosewell", "Silverbeck", "Springmount", "Stonebridge", "Summerfield",
    "Thornbury", "Umberley", "Veyrane", "Walnutgrove", "Westmere",
    "Willowford", "Windmere", "Wrenfield", "Yarrowdale", "Zephyrhill",
)

# No invented title may sit within edit distance 2 of "Forrest Gump",
# otherwise a misspelled mention stops being unambiguous.
MOVIE_TITLES = (
    "Amber Crossing", "The Glass Orchard", "Midnight Harbor",
    "Paper Lanterns", "A Winter in Salina", "The Ninth Lighthouse",
    "Signals from Arcadia", "The Currant Thief", "Halfway to Juniper",
    "The Marble Aviary", "Low Tide at Noon", "The Botanist's Alibi",
    "Copper and Rain", "The Furthest Meridian", "Ashes of the Regatta",
    "The Quiet Turbine", "Saffron Boulevard", "The Last Apiary",
    "Tides of Meridel", "The Cartwright Code", "Velvet Equations",
    "The Orchard at Dusk", "Nocturne for Three", "The Borrowed Sky",
    "Ferryman's Waltz", "The Salt Garden", "Arrows over Antrim",
    "The Winter Telegraph", "Chasing the Zephyr", "The Pearl Divers",
    "Static on Channel Nine", "The Alabaster Fox",
    "Seven Minutes of Summer", "The Lantern Keeper", "Driftwood Serenade",
    "The Hollow Compass", "Postcards from Veldt",
    "The Umbrella Parliament", "Gravity's Chorus", "The Mapmaker's Wife",
    "Racing the Monsoon", "The Opaline Express", "Whistle Stop Weather",
    "The Granite Notebook", "Lullaby for Engines", "The Distant Vineyard",
    "Octavia's Loom", "Forrest Gump",
)

GENRES = (
    "drama", "comedy", "thriller", "science fiction", "romance", "horror",
    "animation", "documentary",
)

ACTOR_FIRSTS = (
    "Aurelio", "Beatrix", "Caspian", "Daphne", "Ezra", "Fern", "Gideon",
    "Harriet", "Ingrid", "Jasper", "Lena", "Marcus", "Noelle", "Orson",
    "Priya", "Rowan", "Sylvie", "Theo", "Uma", "Viktor",
)
ACTOR_LASTS = (
    "Ashcroft", "Beaumont", "Calloway", "Devereux", "Ellison", "Fairbanks",
    "Grimaldi", "Hartley", "Iverson", "Juneau", "Kessler", "Lindqvist",
)

SHOW_TIMES = ("14:30", "17:00", "19:30", "20:45", "22:15")
# 2024-05-28 .. 2024-06-07; 2024-06-01 is "tonight" under SESSION_CLOCK and
# is kept out of the random draw so it holds exactly eight screenings.
SHOW_DATES = tuple(
    f"2024-05-{d:02d}" for d in range(28, 32)
) + tuple(f"2024-06-{d:02d}" for d in range(1, 8))

SCREENING_COUNT = 120


def _zipf_weights(n: int, s: float) -> list[float]:
    return [(k + 1) ** -s for k in range(n)]


# -- cinema schema and tasks -------------------------------------------------------


def cinema_schema_doc() -> dict:
    def ids(*names):
        return [
            {
                "name": n,
                "semantic_type": "identifier",
                "annotation": {"request_preference": "never", "awareness_prior": [1, 9]},
            }
            for n in names
        ]

    return {
        "tables": [
            {
                "name": "customer",
                "primary_key": "customer_id",
                "columns": ids("customer_id")
                + [
                    {"name": "first_name", "semantic_type": "text",
                     "annotation": {"awareness_prior": [9, 10]}},
                    {"name": "last_name", "semantic_type": "text",
                     "annotation": {"awareness_prior": [9, 10]}},
                    {"name": "city", "semantic_type": "text",
                     "annotation": {"awareness_prior": [9, 10]}},
                    {"name": "birth_year", "semantic_type": "integer",
                     "annotation": {"request_preference": "avoid",
                                    "awareness_prior": [1, 3],
                                    "display_name": "year of birth"}},
                ],
            },
            {
                "name": "movie",
                "primary_key": "movie_id",
                "columns": ids("movie_id")
                + [
                    {"name": "movie_title", "semantic_type": "text",
                     "annotation": {"awareness_prior": [9, 10],
                                    "display_name": "movie title"}},
                    {"name": "genre", "semantic_type": "text",
                     "annotation": {"awareness_prior": [7, 10]}},
                    {"name": "release_year", "semantic_type": "integer",
                     "annotation": {"awareness_prior": [1, 4],
                                    "display_name": "release year"}},
                ],
            },
            {
                "name": "actor",
                "primary_key": "actor_id",
                "columns": ids("actor_id")
                + [
                    {"name": "actor_name", "semantic_type": "text",
                     "annotation": {"awareness_prior": [3, 5],
                                    "display_name": "actor"}},
                ],
            },
            {
                "name": "screening",
                "primary_key": "screening_id",
                "columns": ids("screening_id", "movie_id")
                + [
                    {"name": "show_date", "semantic_type": "date",
                     "annotation": {"awareness_prior": [4, 5],
                                    "display_name": "day"}},
                    {"name": "show_time", "semantic_type": "time",
                     "annotation": {"display_name": "start time"}},
                ],
            },
            {
                "name": "reservation",
                "primary_key": "reservation_id",
                "columns": ids("reservation_id", "customer_id", "screening_id")
                + [
                    {"name": "ticket_amount", "semantic_type": "integer",
                     "annotation": {"awareness_prior": [1, 3],
                                    "display_name": "number of tickets"}},
                ],
            },
            {
                "name": "movie_actor",
                "primary_key": "ma_id",
                "columns": ids("ma_id", "movie_id", "actor_id"),
            },
        ],
        "foreign_keys": [
            {"table": "screening", "column": "movie_id",
             "references_table": "movie", "references_column": "movie_id"},
            {"table": "reservation", "column": "customer_id",
             "references_table": "customer", "references_column": "customer_id"},
            {"table": "reservation", "column": "screening_id",
             "references_table": "screening", "references_column": "screening_id"},
            {"table": "movie_actor", "column": "movie_id",
             "references_table": "movie", "references_column": "movie_id"},
            {"table": "movie_actor", "column": "actor_id",
             "references_table": "actor", "references_column": "actor_id"},
        ],
    }


def cinema_tasks_doc() -> dict:
    return {
        "tasks": [
            {
                "name": "ticket_reservation",
                "slots": [
                    {"name": "customer", "kind": "entity", "table": "customer"},
                    {"name": "screening", "kind": "entity", "table": "screening"},
                    {"name": "ticket_amount", "kind": "scalar", "semantic_type": "integer"},
                ],
                "action": {
                    "type": "insert",
                    "table": "reservation",
                    "values": {
                        "customer_id": "customer",
                        "screening_id": "screening",
                        "ticket_amount": "ticket_amount",
                    },
                },
            },
            {
                "name": "cancel_reservation",
                "slots": [
                    {"name": "reservation", "kind": "entity", "table": "reservation"},
                ],
                "action": {
                    "type": "delete",
                    "table": "reservation",
                    "values": {"reservation_id": "reservation"},
                },
            },
            {
                "name": "list_screenings",
                "slots": [
                    {"name": "screening", "kind": "entity", "table": "screening"},
                ],
                "action": {"type": "query", "table": "screening"},
            },
            {
                "name": "movie_info",
                "slots": [
                    {"name": "movie_title", "kind": "entity", "table": "movie"},
                ],
                "action": {"type": "query", "table": "movie"},
            },
        ]
    }


def cinema_schema() -> Schema:
    return schema_from_dict(cinema_schema_doc(), source="cinema fixture")


def cinema_tasks(schema: Schema | None = None) -> list[TaskDefinition]:
    return tasks_from_dict(
        cinema_tasks_doc(), schema or cinema_schema(), source="cinema fixture"
    )


# -- templates, lexicon, responses -------------------------------------------------

# Placeholders are limited to names the live pipeline also abstracts
# (gazetteer entity slots and scalar task slots); dates and times stay
# literal because they reach the classifier as plain tokens.
_T = [
    # ticket_reservation
    ("I want to reserve {ticket_amount} tickets.", "request_ticket_reservation",
     {"ticket_amount": {"integer": True}}),
    ("I want to reserve tickets.", "request_ticket_reservation", {}),
    ("Can I book seats for {movie_title}?", "request_ticket_reservation",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("I would like tickets for {movie_title}.", "request_ticket_reservation",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("Book me {ticket_amount} seats for {movie_title}.", "request_ticket_reservation",
     {"ticket_amount": {"integer": True},
      "movie_title": {"column": "movie.movie_title"}}),
    ("I need tickets for tonight.", "request_ticket_reservation", {}),
    ("Reserve a ticket for me.", "request_ticket_reservation", {}),
    # cancel_reservation
    ("I want to cancel my reservation.", "request_cancel_reservation", {}),
    ("Please cancel my booking.", "request_cancel_reservation", {}),
    ("Cancel the reservation.", "request_cancel_reservation", {}),
    ("I need to cancel my tickets.", "request_cancel_reservation", {}),
    ("Drop my reservation, please.", "request_cancel_reservation", {}),
    ("I can't make it, cancel my booking.", "request_cancel_reservation", {}),
    # list_screenings
    ("What screenings are on tonight?", "request_list_screenings", {}),
    ("What's playing tonight?", "request_list_screenings", {}),
    ("Which movies are showing tomorrow?", "request_list_screenings", {}),
    ("Show me the screenings for {movie_title}.", "request_list_screenings",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("When is {movie_title} playing?", "request_list_screenings",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("List the screenings, please.", "request_list_screenings", {}),
    ("What can I watch this evening?", "request_list_screenings", {}),
    # movie_info
    ("Tell me about {movie_title}.", "request_movie_info",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("What do you know about {movie_title}?", "request_movie_info",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("Give me the details for {movie_title}.", "request_movie_info",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("What genre is {movie_title}?", "request_movie_info",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("I have a question about {movie_title}.", "request_movie_info",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("Movie details for {movie_title}, please.", "request_movie_info",
     {"movie_title": {"column": "movie.movie_title"}}),
    # inform(customer)
    ("My name is {customer}.", "inform(customer)",
     {"customer": {"column": "customer.first_name"}}),
    ("I'm {customer}.", "inform(customer)",
     {"customer": {"column": "customer.first_name"}}),
    ("It's {customer}.", "inform(customer)",
     {"customer": {"column": "customer.first_name"}}),
    ("{customer} here.", "inform(customer)",
     {"customer": {"column": "customer.first_name"}}),
    ("This is {customer} speaking.", "inform(customer)",
     {"customer": {"column": "customer.first_name"}}),
    ("The name is {customer}.", "inform(customer)",
     {"customer": {"column": "customer.first_name"}}),
    # inform(movie_title)
    ("The movie title is {movie_title}.", "inform(movie_title)",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("The movie is {movie_title}.", "inform(movie_title)",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("{movie_title}.", "inform(movie_title)",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("It's the film {movie_title}.", "inform(movie_title)",
     {"movie_title": {"column": "movie.movie_title"}}),
    ("For {movie_title}.", "inform(movie_title)",
     {"movie_title": {"column": "movie.movie_title"}}),
    # inform(ticket_amount)
    ("I need {ticket_amount} tickets.", "inform(ticket_amount)",
     {"ticket_amount": {"integer": True}}),
    ("{ticket_amount} seats, please.", "inform(ticket_amount)",
     {"ticket_amount": {"integer": True}}),
    ("Make it {ticket_amount}.", "inform(ticket_amount)",
     {"ticket_amount": {"integer": True}}),
    ("Just {ticket_amount} of us.", "inform(ticket_amount)",
     {"ticket_amount": {"integer": True}}),
    ("{ticket_amount} tickets.", "inform(ticket_amount)",
     {"ticket_amount": {"integer": True}}),
    # inform(screening); times and days stay literal
    ("The evening showing.", "inform(screening)", {}),
    ("The 19:30 one.", "inform(screening)", {}),
    ("The early afternoon screening.", "inform(screening)", {}),
    # built-ins
    ("Yes.", "affirm", {}),
    ("Yes, please.", "affirm", {}),
    ("That's right.", "affirm", {}),
    ("Correct, go ahead.", "affirm", {}),
    ("Sounds good, do it.", "affirm", {}),
    ("No.", "deny", {}),
    ("No, that's wrong.", "deny", {}),
    ("Not quite.", "deny", {}),
    ("No, don't.", "deny", {}),
    ("Never mind.", "abort", {}),
    ("Forget it.", "abort", {}),
    ("Stop, let's not do this.", "abort", {}),
    ("Leave it, I changed my mind.", "abort", {}),
    ("I don't know.", "unknown_value", {}),
    ("No idea, sorry.", "unknown_value", {}),
    ("I'm not sure.", "unknown_value", {}),
    ("I can't remember.", "unknown_value", {}),
    ("Hello!", "greet", {}),
    ("Hi!", "greet", {}),
    ("Hey.", "greet", {}),
    ("Hi there.", "greet", {}),
    ("Good evening.", "greet", {}),
    ("Goodbye.", "bye", {}),
    ("Bye, thanks for the help.", "bye", {}),
    ("See you later.", "bye", {}),
]


def cinema_templates_doc() -> dict:
    out = []
    for text, intent, bindings in _T:
        entry: dict = {"text": text, "intent": intent}
        if bindings:
            entry["bindings"] = bindings
        out.append(entry)
    return {"templates": out}


CINEMA_LEXICON = """\
# one synonym group per line; groups may contain multi-word phrases
reserve,book
tickets,seats
movie,film
want,need
tonight,this evening
screenings,showings
cancel,drop
playing,showing
details,information
hello,hi
goodbye,bye
"""


def cinema_responses() -> dict:
    return {
        "greet": "Welcome to the box office. I can reserve tickets, cancel reservations, and look up screenings.",
        "bye": "Goodbye, enjoy the movie!",
        "clarify": "Sorry, I didn't catch that. Could you say it differently?",
        "abort_confirmed": "Alright, I've dropped that request.",
        "task_in_progress": "We're still working on the {task}. Say never mind to stop.",
        "no_match": "I couldn't find a matching {entity}. Let's try again from the top.",
        "offer_list": "I found these {entity} options:\n{choices}\nWhich number do you mean?",
        "ask": "What is the {attribute} of the {entity}?",
        "ask:customer.city": "Which city do you live in?",
        "ask:customer.first_name": "What's your first name?",
        "ask:customer.last_name": "What's your last name?",
        "ask:movie.movie_title": "Which movie is it?",
        "ask:movie.genre": "What genre is the movie?",
        "ask:screening.show_date": "Which day is the screening?",
        "ask:screening.show_time": "What time does it start?",
        "ask:reservation.ticket_amount": "How many tickets was the reservation for?",
        "request_slot": "What should I use for the {slot}?",
        "request_slot:ticket_amount": "How many tickets would you like?",
        "confirm": "I'm about to run the {task} with {summary}. Shall I go ahead?",
        "confirm:ticket_reservation": "So that's {summary}. Should I book it?",
        "confirm:cancel_reservation": "I'll cancel the reservation ({summary}). Are you sure?",
        "inform_result": "Done with the {task}: {echo}.",
        "inform_result:ticket_reservation": "All set! Your reservation is booked: {echo}.",
        "inform_result:cancel_reservation": "Your reservation has been cancelled.",
        "inform_result:list_screenings": "I found {count} screenings:\n{listing}",
        "inform_result:movie_info": "Here's what I have:\n{listing}",
        "transaction_failed": "I couldn't complete that: {reason}.",
    }


CINEMA_CONFIG = f"""\
# Workspace layout and runtime knobs. Paths are relative to this file.

[paths]
schema = "schema.json"
tasks = "tasks.json"
templates = "templates.json"
lexicon = "lexicon.txt"
responses = "responses.json"
data_dir = "data"
artifacts_dir = "artifacts"

[session]
clock = "{SESSION_CLOCK}"

[policy]
max_join_depth = 2
depth_decay = 0.8
list_threshold = 5
avoid_penalty = 0.1

[nlu]
smoothing = 1.0
confidence_floor = 0.3
fuzzy_cap = 2
max_ngram = 5

[datagen]
per_template = 15
paraphrase_k = 4
integer_range = [1, 10]
corpus_seed = 7
flow_seed = 11
flows = 1000
"""


# -- cinema data -------------------------------------------------------------------


def cinema_rows(scale: int = 1000, seed: int = 42) -> dict[str, list[dict]]:
    """All table rows as string cells, CSV-ready, keyed by table name.

    Row draws happen in a fixed table order so the same (scale, seed) always
    yields the same rows. A few rows are pinned rather than drawn: customer
    C17 (Imogen Walsh of Veyrane, present once scale reaches 17) and the
    three Forrest Gump screenings S2/S3/S4, which are the only ones for that
    movie. 2024-06-01 holds exactly eight screenings at every scale.
    """
    if scale < 1:
        raise ValueError(f"scale must be positive, got {scale}")
    rng = random.Random(seed)

    gump = len(MOVIE_TITLES) - 1
    movies = []
    for i, title in enumerate(MOVIE_TITLES):
        if i == gump:
            genre, year = "drama", 1994
        else:
            genre, year = rng.choice(GENRES), rng.randint(1968, 2023)
        movies.append(
            {"movie_id": f"M{i + 1}", "movie_title": title,
             "genre": genre, "release_year": str(year)}
        )

    composed = [
        f"{first} {last}" for first in ACTOR_FIRSTS for last in ACTOR_LASTS
    ][:59]
    actors = [
        {"actor_id": f"A{i + 1}", "actor_name": name}
        for i, name in enumerate(composed + ["Tom Hanks"])
    ]

    links = []
    for i in range(len(MOVIE_TITLES)):
        cast = rng.sample(range(59), rng.randint(2, 3))
        if i == gump:
            cast = cast[:2] + [59]  # Tom Hanks
        for actor_idx in cast:
            links.append(
                {"ma_id": f"MA{len(links) + 1}", "movie_id": f"M{i + 1}",
                 "actor_id": f"A{actor_idx + 1}"}
            )

    tonight = "2024-06-01"
    gump_id = f"M{gump + 1}"
    other_dates = [d for d in SHOW_DATES if d != tonight]
    tonight_movies = rng.sample(range(gump), 7)
    screenings = [
        {"screening_id": "S1", "movie_id": f"M{tonight_movies[0] + 1}",
         "show_date": tonight, "show_time": "17:00"},
        {"screening_id": "S2", "movie_id": gump_id,
         "show_date": "2024-05-31", "show_time": "19:30"},
        {"screening_id": "S3", "movie_id": gump_id,
         "show_date": tonight, "show_time": "19:30"},
        {"screening_id": "S4", "movie_id": gump_id,
         "show_date": "2024-06-02", "show_time": "15:00"},
    ]
    for n, movie_idx in enumerate(tonight_movies[1:]):
        screenings.append(
            {"screening_id": f"S{5 + n}", "movie_id": f"M{movie_idx + 1}",
             "show_date": tonight, "show_time": SHOW_TIMES[n % len(SHOW_TIMES)]}
        )
    seen = {(s["movie_id"], s["show_date"], s["show_time"]) for s in screenings}
    weights = _zipf_weights(gump, 0.9)
    sid = len(screenings) + 1
    while len(screenings) < SCREENING_COUNT:
        movie_id = f"M{rng.choices(range(gump), weights)[0] + 1}"
        date = rng.choice(other_dates)
        time = rng.choice(SHOW_TIMES)
        if (movie_id, date, time) in seen:
            continue
        seen.add((movie_id, date, time))
        screenings.append(
            {"screening_id": f"S{sid}", "movie_id": movie_id,
             "show_date": date, "show_time": time}
        )
        sid += 1

    first_pool = [n for n in FIRST_NAMES if n != "Imogen"]
    city_pool = [c for c in CITIES if c != "Veyrane"]
    first_w = _zipf_weights(len(first_pool), 1.1)
    last_w = _zipf_weights(len(LAST_NAMES), 1.3)
    city_w = _zipf_weights(len(city_pool), 0.8)
    customers = []
    for i in range(1, scale + 1):
        first = rng.choices(first_pool, first_w)[0]
        last = rng.choices(LAST_NAMES, last_w)[0]
        city = rng.choices(city_pool, city_w)[0]
        year = int(rng.triangular(1950, 2005, 1988))
        if i == 17:
            first, last, city, year = "Imogen", "Walsh", "Veyrane", 1988
        customers.append(
            {"customer_id": f"C{i}", "first_name": first, "last_name": last,
             "city": city, "birth_year": str(year)}
        )

    # the pinned screenings S1-S10 start with no bookings, so identifying
    # one of them never turns on attributes of whoever else booked it
    reservations = []
    for i in range(1, max(1, scale * 3 // 5) + 1):
        reservations.append(
            {
                "reservation_id": f"R{i}",
                "customer_id": f"C{rng.randint(1, scale)}",
                "screening_id": f"S{rng.randint(11, SCREENING_COUNT)}",
                "ticket_amount": str(rng.choices(range(1, 7), (3, 4, 2, 1, 1, 1))[0]),
            }
        )

    return {
        "customer": customers,
        "movie": movies,
        "actor": actors,
        "screening": screenings,
        "reservation": reservations,
        "movie_actor": links,
    }


def _csv_text(schema: Schema, table: str, rows: list[dict]) -> str:
    columns = [c.name for c in schema.table(table).columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(str(path), str(exc)) from exc
    return path


def generate_fixture(out_dir: str | Path, scale: int = 1000, seed: int = 42) -> list[Path]:
    """Write the complete cinema workspace into out_dir; returns the paths.

    The output is self-consistent: the schema, tasks, and templates are
    validated against each other before anything is written, and every CSV
    foreign key points at a generated row.
    """
    out = Path(out_dir)
    schema_doc = cinema_schema_doc()
    schema = schema_from_dict(schema_doc, source="cinema fixture")
    tasks = tasks_from_dict(cinema_tasks_doc(), schema, source="cinema fixture")
    templates_from_dict(cinema_templates_doc(), schema, tasks, source="cinema fixture")
    rows = cinema_rows(scale, seed)

    written = [
        _write(out / "schema.json", json.dumps(schema_doc, indent=2) + "\n"),
        _write(out / "tasks.json", json.dumps(cinema_tasks_doc(), indent=2) + "\n"),
        _write(out / "templates.json", json.dumps(cinema_templates_doc(), indent=2) + "\n"),
        _write(out / "lexicon.txt", CINEMA_LEXICON),
        _write(out / "responses.json", json.dumps(cinema_responses(), indent=2) + "\n"),
        _write(out / "catforge.toml", CINEMA_CONFIG),
    ]
    for table in rows:
        written.append(_write(out / "data" / f"{table}.csv", _csv_text(schema, table, rows[table])))
    return written


# -- benchmark population ----------------------------------------------------------

BENCH_SURNAME_STEMS = (
    "Ash", "Baren", "Cald", "Dray", "Elm", "Farn", "Gold", "Hawk", "Ivers",
    "Kell", "Lang", "Mill", "Nor", "Oak", "Pick", "Quint", "Rad", "Sand",
    "Thorn", "Under", "Vance", "Whit", "Yard", "Zell", "Gren",
)
BENCH_SURNAME_SUFFIXES = ("ford", "worth", "field", "stone", "well", "by")
BENCH_SURNAMES = tuple(
    stem + suffix for stem in BENCH_SURNAME_STEMS for suffix in BENCH_SURNAME_SUFFIXES
)

BENCH_CITY_PREFIXES = ("Aren", "Bel", "Cor", "Dun", "El", "Fen", "Gal")
BENCH_CITY_SUFFIXES = ("mouth", "stead", "crest", "haven", "port")
BENCH_CITIES = tuple(
    prefix + suffix for prefix in BENCH_CITY_PREFIXES for suffix in BENCH_CITY_SUFFIXES
)

BENCH_OCCUPATIONS = (
    "teacher", "nurse", "engineer", "carpenter", "accountant", "chef",
    "pilot", "librarian", "plumber", "electrician", "farmer", "journalist",
    "pharmacist", "architect", "dentist", "mechanic", "tailor", "baker",
    "surveyor", "translator", "florist", "locksmith", "optician",
    "veterinarian", "midwife",
)

VOUCHER_POOL = 400
VOUCHER_RATE = 0.15


def benchmark_schema_doc() -> dict:
    def pk(name):
        return {
            "name": name,
            "semantic_type": "identifier",
            "annotation": {"request_preference": "never", "awareness_prior": [1, 9]},
        }

    return {
        "tables": [
            {
                "name": "customer",
                "primary_key": "customer_id",
                "columns": [
                    pk("customer_id"),
                    {"name": "first_name", "semantic_type": "text",
                     "annotation": {"awareness_prior": [9, 10]}},
                    {"name": "last_name", "semantic_type": "text",
                     "annotation": {"awareness_prior": [19, 20]}},
                    {"name": "age", "semantic_type": "integer",
                     "annotation": {"awareness_prior": [19, 20]}},
                    pk("city_id"),
                    pk("occupation_id"),
                    {"name": "membership", "semantic_type": "text",
                     "annotation": {"awareness_prior": [9, 10]}},
                    {"name": "signup_year", "semantic_type": "integer",
                     "annotation": {"awareness_prior": [2, 5]}},
                    # high cardinality, rarely filled, almost never known:
                    # a distinct-count ranking loves it, an awareness-weighted
                    # one correctly leaves it alone
                    {"name": "voucher_code", "semantic_type": "text",
                     "annotation": {"awareness_prior": [1, 9]}},
                ],
            },
            {
                "name": "city",
                "primary_key": "city_id",
                "columns": [
                    pk("city_id"),
                    {"name": "city_name", "semantic_type": "text",
                     "annotation": {"awareness_prior": [9, 10]}},
                ],
            },
            {
                "name": "occupation",
                "primary_key": "occupation_id",
                "columns": [
                    pk("occupation_id"),
                    {"name": "occupation_name", "semantic_type": "text",
                     "annotation": {"awareness_prior": [3, 5]}},
                ],
            },
        ],
        "foreign_keys": [
            {"table": "customer", "column": "city_id",
             "references_table": "city", "references_column": "city_id"},
            {"table": "customer", "column": "occupation_id",
             "references_table": "occupation", "references_column": "occupation_id"},
        ],
    }


def benchmark_schema() -> Schema:
    return schema_from_dict(benchmark_schema_doc(), source="benchmark fixture")


_BENCH_FIRST_W = _zipf_weights(len(FIRST_NAMES), 1.1)
_BENCH_LAST_W = _zipf_weights(len(BENCH_SURNAMES), 1.3)
_BENCH_CITY_W = _zipf_weights(len(BENCH_CITIES), 1.0)
_BENCH_OCC_W = _zipf_weights(len(BENCH_OCCUPATIONS), 0.7)


def _bench_customer(rng: random.Random, i: int, surnames, surname_w) -> dict:
    return {
        "customer_id": f"C{i}",
        "first_name": rng.choices(FIRST_NAMES, _BENCH_FIRST_W)[0],
        "last_name": rng.choices(surnames, surname_w)[0],
        "age": rng.randint(18, 79),
        "city_id": f"CT{rng.choices(range(1, len(BENCH_CITIES) + 1), _BENCH_CITY_W)[0]}",
        "occupation_id": f"O{rng.choices(range(1, len(BENCH_OCCUPATIONS) + 1), _BENCH_OCC_W)[0]}",
        "membership": rng.choices(("basic", "silver", "gold"), (80, 15, 5))[0],
        "signup_year": rng.choices(range(2019, 2025), (4, 6, 9, 14, 32, 35))[0],
        "voucher_code": (
            f"V{1000 + rng.randrange(VOUCHER_POOL)}"
            if rng.random() < VOUCHER_RATE
            else None
        ),
    }


def build_benchmark_store(scale: int = 10_000, seed: int = 42) -> Datastore:
    """In-memory customer base for identification benchmarks."""
    if scale < 1:
        raise ValueError(f"scale must be positive, got {scale}")
    store = Datastore(benchmark_schema())
    store.insert_rows(
        "city",
        [{"city_id": f"CT{i + 1}", "city_name": name} for i, name in enumerate(BENCH_CITIES)],
    )
    store.insert_rows(
        "occupation",
        [
            {"occupation_id": f"O{i + 1}", "occupation_name": name}
            for i, name in enumerate(BENCH_OCCUPATIONS)
        ],
    )
    rng = random.Random(seed)
    store.insert_rows(
        "customer",
        [_bench_customer(rng, i, BENCH_SURNAMES, _BENCH_LAST_W) for i in range(1, scale + 1)],
    )
    return store


def adaptation_rows(count: int, seed: int, start_index: int) -> list[dict]:
    """Customer rows whose surnames collapse onto the three most common
    values, flattening the column's usefulness once ingested. Ids continue
    from start_index so they can be appended to an existing store."""
    rng = random.Random(seed)
    head = BENCH_SURNAMES[:3]
    head_w = (5, 3, 2)
    return [
        _bench_customer(rng, start_index + n, head, head_w)
        for n in range(count)
    ]
