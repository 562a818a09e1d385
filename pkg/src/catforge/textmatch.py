"""Damerau-Levenshtein matching for misspelling-tolerant value lookup."""

from __future__ import annotations


def damerau_levenshtein(a: str, b: str, cap: int | None = None) -> int:
    """Edit distance counting insert/delete/substitute/adjacent-transpose.

    Optimal-string-alignment variant. When `cap` is given and the distance
    provably exceeds it, returns cap + 1 early.
    """
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if cap is not None and abs(la - lb) > cap:
        return cap + 1
    if la == 0:
        return lb
    if lb == 0:
        return la

    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        row_min = i
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            best = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                best = min(best, prev2[j - 2] + 1)
            cur[j] = best
            if best < row_min:
                row_min = best
        if cap is not None and row_min > cap:
            return cap + 1
        prev2, prev = prev, cur
    return prev[lb]


def fold(s: str) -> str:
    return s.casefold().strip()


def closest_values(probe: str, values: list[str], max_edits: int) -> tuple[list[str], int]:
    """Values at minimal Damerau-Levenshtein distance <= max_edits from probe.

    Distance is computed case-folded. Ties at the minimal distance all match
    (the caller widens rather than guessing). Returns (matches, distance);
    ([], -1) when nothing is within max_edits.
    """
    probe_f = fold(probe)
    best: list[str] = []
    best_dist = max_edits + 1
    for value in values:
        d = damerau_levenshtein(probe_f, fold(value), cap=min(max_edits, best_dist))
        if d < best_dist:
            best = [value]
            best_dist = d
        elif d == best_dist and d <= max_edits:
            best.append(value)
    if best_dist > max_edits:
        return [], -1
    return best, best_dist


def match_threshold(value: str, hard_cap: int = 2) -> int:
    """Allowed edits for a gazetteer value: min(cap, ceil(len/5))."""
    return min(hard_cap, -(-len(value) // 5))
