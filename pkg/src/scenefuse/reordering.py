"""Scene reordering under a causality constraint.

The cost of a scene order is the sum over adjacent pairs of
1 - IOU(rosters); scenes sharing a character must keep their original
relative order. A greedy pass moves each scene as far forward as the
constraint allows, keeping the move only on a strict cost improvement,
and repeats until a full pass changes nothing. An exhaustive oracle
covers small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

from .errors import TooLarge

BRUTE_FORCE_MAX_SCENES = 8


def iou(a: Iterable[str], b: Iterable[str]) -> float:
    """Intersection over union of two speaker sets; 0 when both empty."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return len(sa & sb) / union


def order_cost(rosters: Sequence[Iterable[str]]) -> float:
    """Sum of 1 - IOU over adjacent scene pairs."""
    sets = [set(r) for r in rosters]
    total = 0.0
    for a, b in zip(sets, sets[1:]):
        total += 1.0 - iou(a, b)
    return total


def causality(rosters: Sequence[Iterable[str]]) -> frozenset[tuple[int, int]]:
    """All ordered index pairs (i, j), i < j, whose scenes share a character."""
    sets = [set(r) for r in rosters]
    return frozenset(
        (i, j)
        for i in range(len(sets))
        for j in range(i + 1, len(sets))
        if sets[i] & sets[j]
    )


@dataclass(frozen=True)
class SceneOrder:
    permutation: tuple[int, ...]
    cost: float


def _distance_matrix(sets: list[set[str]]) -> list[list[float]]:
    return [[1.0 - iou(a, b) for b in sets] for a in sets]


def _fold(dist: list[list[float]], perm: Sequence[int]) -> float:
    total = 0.0
    for a, b in zip(perm, perm[1:]):
        total += dist[a][b]
    return total


def reorder(rosters: Sequence[Iterable[str]]) -> SceneOrder:
    """Greedy cost reduction by frontmost causality-legal moves.

    Each pass walks positions left to right. A scene's one candidate
    destination is just past the nearest earlier scene sharing one of
    its characters (the front if none). The move is kept only if it
    strictly lowers the total cost; any move restarts the pass.
    """
    n = len(rosters)
    sets = [set(r) for r in rosters]
    if n <= 1:
        return SceneOrder(tuple(range(n)), 0.0)
    dist = _distance_matrix(sets)
    shares = [[bool(sets[i] & sets[j]) for j in range(n)] for i in range(n)]

    perm = list(range(n))
    current = _fold(dist, perm)
    moved = True
    while moved:
        moved = False
        for p in range(1, n):
            scene = perm[p]
            dest = 0
            for t in range(p - 1, -1, -1):
                if shares[perm[t]][scene]:
                    dest = t + 1
                    break
            if dest == p:
                continue
            candidate = perm[:dest] + [scene] + perm[dest:p] + perm[p + 1:]
            cost = _fold(dist, candidate)
            if cost < current:
                perm = candidate
                current = cost
                moved = True
                break
    return SceneOrder(tuple(perm), current)


def brute_force_reorder(rosters: Sequence[Iterable[str]]) -> SceneOrder:
    """Exhaustive minimum over causality-respecting permutations (oracle).

    Permutations are scanned in lexicographic order and replaced only on
    a strictly lower cost, so ties keep the lexicographically first.
    """
    n = len(rosters)
    if n > BRUTE_FORCE_MAX_SCENES:
        raise TooLarge(f"n={n} exceeds brute-force limit {BRUTE_FORCE_MAX_SCENES}")
    sets = [set(r) for r in rosters]
    if n <= 1:
        return SceneOrder(tuple(range(n)), 0.0)
    dist = _distance_matrix(sets)
    pairs = causality(rosters)

    best_perm: tuple[int, ...] | None = None
    best_cost = float("inf")
    for perm in permutations(range(n)):
        pos = {scene: t for t, scene in enumerate(perm)}
        if any(pos[i] > pos[j] for i, j in pairs):
            continue
        cost = _fold(dist, perm)
        if cost < best_cost:
            best_perm = perm
            best_cost = cost
    return SceneOrder(best_perm, best_cost)


def order_to_dict(rosters: Sequence[Iterable[str]], order: SceneOrder) -> dict:
    return {
        "permutation": list(order.permutation),
        "original_cost": order_cost(rosters),
        "reordered_cost": order.cost,
    }
