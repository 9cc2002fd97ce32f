"""Minimum-description-length scene segmentation.

A partition's cost is the sum over scenes of

    C(N, n) + l * log2(n)

where N is the transcript-wide speaker count, n the distinct speakers
in the scene, l its line count, and C(N, n) = log2(N choose n) the bits
needed to name the scene's speaker subset. The optimal partition over
all 2^(m-1) contiguous tilings is found by a prefix DP; the number of
scenes is emergent, never supplied.

Exactness contract: the DP and the exhaustive search share one span
cost matrix and accumulate partition costs as the same left-to-right
fold, so their totals are bit-identical, never merely close. Ties break
toward fewer scenes, then the lexicographically smallest break tuple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTranscript, InvalidCount, TooLarge
from .model import Partition, Scene, Transcript, scene_roster

BRUTE_FORCE_MAX_LINES = 18


def codebook_cost(n_total: int, n_scene: int) -> float:
    """log2(n_total choose n_scene), summed in log space."""
    if n_total < 1 or n_scene < 1 or n_scene > n_total:
        raise InvalidCount(f"need 1 <= n <= N, got n={n_scene}, N={n_total}")
    bits = 0.0
    for k in range(1, n_scene + 1):
        bits += math.log2(n_total - n_scene + k) - math.log2(k)
    return bits


def scene_cost(n_total: int, n_scene: int, length: int) -> float:
    """Bits to encode one scene: codebook plus l * log2(n) line terms."""
    if length < 1:
        raise InvalidCount(f"scene length must be >= 1, got {length}")
    return codebook_cost(n_total, n_scene) + length * math.log2(n_scene)


@dataclass(frozen=True)
class SpanCosts:
    """Per-span distinct-speaker counts and scene costs for one transcript.

    Both entries are (m+1) x (m+1); cell [i, j] describes line span
    [i, j) and is meaningful for i < j only.
    """

    n_total: int
    counts: np.ndarray
    costs: np.ndarray


def _speaker_codes(transcript: Transcript) -> np.ndarray:
    index: dict[str, int] = {}
    codes = np.empty(len(transcript.lines), np.int64)
    for i, line in enumerate(transcript.lines):
        codes[i] = index.setdefault(line.speaker, len(index))
    return codes


def span_costs(transcript: Transcript, n_speakers: int | None = None) -> SpanCosts:
    """Precompute n(i, j) and cost(i, j) for every line span.

    n(i, j) is vectorized through previous-occurrence indices: line t
    adds a new speaker to a span starting at i iff its speaker's prior
    appearance is before i.
    """
    codes = _speaker_codes(transcript)
    m = codes.shape[0]
    observed = int(codes.max()) + 1
    n_total = observed if n_speakers is None else n_speakers
    if n_total < observed:
        raise InvalidCount(f"N={n_total} below observed speaker count {observed}")

    prev = np.full(m, -1, np.int64)
    last_seen: dict[int, int] = {}
    for t, c in enumerate(codes.tolist()):
        if c in last_seen:
            prev[t] = last_seen[c]
        last_seen[c] = t

    starts = np.arange(m)[:, None]
    introduces = prev[None, :] < starts
    running = introduces.cumsum(axis=1)
    base = np.where(np.arange(m) > 0, running[np.arange(m), np.arange(m) - 1], 0)

    counts = np.zeros((m + 1, m + 1), np.int64)
    # cells with j <= i are meaningless and go negative; clamp them so
    # the lookup below stays in range (slot 0 maps to cost 0)
    counts[:m, 1:] = np.maximum(running - base[:, None], 0)

    # lookup tables indexed by n; slot 0 only pads unused cells
    cb = np.zeros(n_total + 1, np.float64)
    lg = np.zeros(n_total + 1, np.float64)
    for n in range(1, n_total + 1):
        cb[n] = codebook_cost(n_total, n)
        lg[n] = math.log2(n)

    lengths = np.arange(m + 1)[None, :] - np.arange(m + 1)[:, None]
    costs = cb[counts] + lengths * lg[counts]
    return SpanCosts(n_total, counts, costs)


def _fold_cost(costs: np.ndarray, boundaries: list[int]) -> float:
    total = 0.0
    for a, b in zip(boundaries, boundaries[1:]):
        total += costs[a, b]
    return total


def _build_partition(
    transcript: Transcript, table: SpanCosts, breaks: tuple[int, ...], total: float
) -> Partition:
    m = len(transcript.lines)
    boundaries = [0, *breaks, m]
    scenes = tuple(
        Scene(a, b, scene_roster(transcript, a, b), float(table.costs[a, b]))
        for a, b in zip(boundaries, boundaries[1:])
    )
    return Partition(scenes, float(total))


def optimal_partition(
    transcript: Transcript, n_speakers: int | None = None
) -> Partition:
    """Globally cheapest partition of the transcript into scenes.

    best[j] holds the cheapest encoding of lines [0, j); each candidate
    extends best[i] with one scene [i, j). Cost comparison is strict,
    with exact ties resolved by scene count and then break tuple, so the
    result is deterministic and matches brute_force_partition.
    """
    if not transcript.lines:
        raise EmptyTranscript("cannot partition an empty transcript")
    table = span_costs(transcript, n_speakers)
    costs = table.costs
    m = len(transcript.lines)

    best_cost = [0.0] * (m + 1)
    best_nscenes = [0] * (m + 1)
    best_breaks: list[tuple[int, ...]] = [()] * (m + 1)
    for j in range(1, m + 1):
        found_cost = math.inf
        found_nscenes = 0
        found_breaks: tuple[int, ...] = ()
        for i in range(j):
            cand_cost = best_cost[i] + costs[i, j]
            if cand_cost > found_cost:
                continue
            cand_nscenes = best_nscenes[i] + 1
            if cand_cost == found_cost:
                if cand_nscenes > found_nscenes:
                    continue
                cand_breaks = best_breaks[i] + (i,) if i else ()
                if cand_nscenes == found_nscenes and cand_breaks >= found_breaks:
                    continue
            else:
                cand_breaks = best_breaks[i] + (i,) if i else ()
            found_cost = cand_cost
            found_nscenes = cand_nscenes
            found_breaks = cand_breaks
        best_cost[j] = found_cost
        best_nscenes[j] = found_nscenes
        best_breaks[j] = found_breaks

    return _build_partition(transcript, table, best_breaks[m], best_cost[m])


def brute_force_partition(
    transcript: Transcript, n_speakers: int | None = None
) -> Partition:
    """Exhaustive minimum over all contiguous partitions (oracle).

    Shares span_costs and the fold order with optimal_partition so the
    two agree exactly, tie-breaking included.
    """
    m = len(transcript.lines)
    if m == 0:
        raise EmptyTranscript("cannot partition an empty transcript")
    if m > BRUTE_FORCE_MAX_LINES:
        raise TooLarge(f"m={m} exceeds brute-force limit {BRUTE_FORCE_MAX_LINES}")
    table = span_costs(transcript, n_speakers)
    costs = table.costs

    best_key: tuple[float, int, tuple[int, ...]] | None = None
    for mask in range(1 << (m - 1)):
        breaks = tuple(k for k in range(1, m) if mask >> (k - 1) & 1)
        total = _fold_cost(costs, [0, *breaks, m])
        key = (total, len(breaks) + 1, breaks)
        if best_key is None or key < best_key:
            best_key = key
    return _build_partition(transcript, table, best_key[2], best_key[0])


def partition_from_breaks(
    transcript: Transcript,
    breaks: tuple[int, ...] | list[int],
    n_speakers: int | None = None,
) -> Partition:
    """Partition induced by fixed break positions, costed for reporting."""
    m = len(transcript.lines)
    if m == 0:
        raise EmptyTranscript("cannot partition an empty transcript")
    ordered = tuple(sorted(set(breaks)))
    if ordered and not (ordered[0] >= 1 and ordered[-1] <= m - 1):
        raise InvalidCount(f"break positions {ordered} outside [1, {m - 1}]")
    table = span_costs(transcript, n_speakers)
    total = _fold_cost(table.costs, [0, *ordered, m])
    return _build_partition(transcript, table, ordered, total)


def effective_partition(
    transcript: Transcript, n_speakers: int | None = None
) -> Partition:
    """Explicit break markers win; otherwise search for the optimum."""
    if transcript.explicit_breaks:
        return partition_from_breaks(transcript, transcript.explicit_breaks, n_speakers)
    return optimal_partition(transcript, n_speakers)
