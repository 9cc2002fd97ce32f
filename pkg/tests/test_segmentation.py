"""Scene segmentation: span costs, the prefix DP, and exhaustive oracles."""

import math
import random

import pytest

from conftest import make_transcript
from scenefuse.errors import EmptyTranscript, InvalidCount, TooLarge
from scenefuse.model import Transcript, scene_roster
from scenefuse.segmentation import (
    brute_force_partition,
    codebook_cost,
    effective_partition,
    optimal_partition,
    partition_from_breaks,
    scene_cost,
    span_costs,
)

SPEAKER_POOL = ["Alice", "Bob", "Charlie", "Dana"]


def random_transcript(rng: random.Random, m: int, n_names: int):
    names = SPEAKER_POOL[:n_names]
    return make_transcript([rng.choice(names) for _ in range(m)])


def closed_form_cost(n_total: int, n_scene: int, length: int) -> float:
    # direct closed form, independent of the log-space accumulation
    return math.log2(math.comb(n_total, n_scene)) + length * math.log2(n_scene)


def fold_closed_form(transcript, breaks, n_total: int) -> float:
    bounds = [0, *breaks, len(transcript.lines)]
    total = 0.0
    for a, b in zip(bounds, bounds[1:]):
        n = len(scene_roster(transcript, a, b))
        total += closed_form_cost(n_total, n, b - a)
    return total


def enumerate_breaks(m: int):
    for mask in range(1 << (m - 1)):
        yield tuple(k for k in range(1, m) if mask >> (k - 1) & 1)


def reference_optimum(transcript, n_total: int):
    """Exhaustive search written only against the closed form."""
    best = None
    for breaks in enumerate_breaks(len(transcript.lines)):
        total = fold_closed_form(transcript, breaks, n_total)
        key = (total, len(breaks) + 1, breaks)
        if best is None or key < best:
            best = key
    return best


def test_codebook_cost_matches_binomials():
    assert codebook_cost(7, 2) == pytest.approx(math.log2(21), abs=1e-12)
    assert codebook_cost(7, 3) == pytest.approx(math.log2(35), abs=1e-12)
    for n_total in range(1, 17):
        for n in range(1, n_total + 1):
            expected = math.log2(math.comb(n_total, n))
            assert codebook_cost(n_total, n) == pytest.approx(expected, abs=1e-9)


def test_codebook_cost_is_symmetric_and_zero_at_full_roster():
    for n_total in range(1, 12):
        assert codebook_cost(n_total, n_total) == pytest.approx(0.0, abs=1e-12)
        for n in range(1, n_total + 1):
            assert codebook_cost(n_total, n) == pytest.approx(
                codebook_cost(n_total, n_total - n) if n < n_total else 0.0,
                abs=1e-9,
            )


@pytest.mark.parametrize(("n_total", "n"), [(0, 1), (3, 0), (3, 4), (-1, -1)])
def test_codebook_cost_rejects_bad_counts(n_total, n):
    with pytest.raises(InvalidCount):
        codebook_cost(n_total, n)


def test_scene_cost_single_speaker_pays_only_the_codebook():
    # l * log2(1) vanishes no matter how long the scene is
    assert scene_cost(5, 1, 100) == pytest.approx(math.log2(5), abs=1e-12)
    assert scene_cost(5, 1, 1) == scene_cost(5, 1, 100)


def test_scene_cost_grows_by_log2_n_per_line():
    for n in range(2, 6):
        step = scene_cost(6, n, 11) - scene_cost(6, n, 10)
        assert step == pytest.approx(math.log2(n), abs=1e-9)


def test_scene_cost_rejects_empty_scene():
    with pytest.raises(InvalidCount):
        scene_cost(3, 2, 0)


def test_span_costs_counts_and_costs_match_direct_evaluation():
    rng = random.Random(7)
    for _ in range(25):
        m = rng.randint(1, 12)
        t = random_transcript(rng, m, rng.randint(2, 4))
        table = span_costs(t)
        n_total = len(t.roster)
        assert table.n_total == n_total
        for i in range(m):
            for j in range(i + 1, m + 1):
                n = len(scene_roster(t, i, j))
                assert table.counts[i, j] == n
                assert table.costs[i, j] == pytest.approx(
                    closed_form_cost(n_total, n, j - i), abs=1e-9
                )


def test_span_costs_speaker_count_injection():
    t = make_transcript(["Alice", "Alice", "Bob"])
    assert span_costs(t, n_speakers=5).n_total == 5
    with pytest.raises(InvalidCount):
        span_costs(t, n_speakers=1)


def test_optimal_matches_brute_force_exactly():
    rng = random.Random(11)
    for _ in range(150):
        m = rng.randint(1, 10)
        t = random_transcript(rng, m, rng.randint(2, 4))
        dp = optimal_partition(t)
        bf = brute_force_partition(t)
        assert dp.total_cost == bf.total_cost  # bit-identical, not approx
        assert dp.breaks == bf.breaks
        assert dp.scenes == bf.scenes


def test_optimal_total_matches_independent_exhaustive_search():
    rng = random.Random(13)
    for _ in range(40):
        m = rng.randint(1, 9)
        t = random_transcript(rng, m, rng.randint(2, 4))
        n_total = len(t.roster)
        best = reference_optimum(t, n_total)
        part = optimal_partition(t)
        assert part.total_cost == pytest.approx(best[0], abs=1e-9)
        # the returned breaks are optimal under the independent arithmetic too
        assert fold_closed_form(t, part.breaks, n_total) == pytest.approx(
            best[0], abs=1e-9
        )


def test_optimal_never_beaten_by_sampled_competitors():
    rng = random.Random(17)
    for _ in range(10):
        m = rng.randint(5, 40)
        t = random_transcript(rng, m, 4)
        part = optimal_partition(t)
        for _ in range(20):
            n_breaks = rng.randint(0, m - 1)
            breaks = sorted(rng.sample(range(1, m), n_breaks))
            other = partition_from_breaks(t, breaks)
            assert part.total_cost <= other.total_cost + 1e-9


def test_exact_ties_prefer_fewer_scenes():
    # alternating two speakers: every partition of ABAB costs exactly 4 bits,
    # so the single-scene encoding must win
    t = make_transcript(["Alice", "Bob", "Alice", "Bob"])
    part = optimal_partition(t)
    assert part.total_cost == 4.0
    assert part.breaks == ()
    assert brute_force_partition(t) == part


def test_single_speaker_with_injected_roster_stays_whole():
    t = make_transcript(["Alice"] * 4)
    part = optimal_partition(t, n_speakers=2)
    assert part.breaks == ()
    assert part.total_cost == 1.0


def test_partition_shape_and_reported_costs():
    rng = random.Random(19)
    t = random_transcript(rng, 14, 3)
    part = optimal_partition(t)
    bounds = [0] + list(part.breaks) + [len(t.lines)]
    assert [s.start for s in part.scenes] == bounds[:-1]
    assert [s.end for s in part.scenes] == bounds[1:]
    for scene in part.scenes:
        assert scene.roster == scene_roster(t, scene.start, scene.end)
        assert scene.length == scene.end - scene.start
        assert scene.n_speakers == len(scene.roster)
    assert sum(s.cost_bits for s in part.scenes) == part.total_cost


def test_partition_from_breaks_sorts_dedupes_and_validates():
    t = make_transcript(["Alice", "Bob", "Alice", "Bob", "Charlie"])
    part = partition_from_breaks(t, [3, 1, 3])
    assert part.breaks == (1, 3)
    with pytest.raises(InvalidCount):
        partition_from_breaks(t, [0])
    with pytest.raises(InvalidCount):
        partition_from_breaks(t, [5])


def test_partition_from_breaks_every_line():
    t = make_transcript(["Alice", "Bob", "Alice"])
    part = partition_from_breaks(t, range(1, 3))
    assert len(part.scenes) == 3
    assert all(s.length == 1 for s in part.scenes)


def test_effective_partition_honors_markers():
    text = "Alice: a\nBob: b\n[SCENE_BREAK]\nAlice: c\nBob: d\n"
    from scenefuse.model import parse_transcript

    t = parse_transcript(text)
    part = effective_partition(t)
    assert part.breaks == (2,)
    # without markers it falls back to the search
    t2 = make_transcript(["Alice", "Bob", "Alice", "Bob"])
    assert effective_partition(t2) == optimal_partition(t2)


def test_brute_force_size_guard():
    t = make_transcript(["Alice", "Bob"] * 10)  # 20 lines
    with pytest.raises(TooLarge):
        brute_force_partition(t)


def test_empty_transcript_rejected_everywhere():
    empty = Transcript(lines=())
    with pytest.raises(EmptyTranscript):
        optimal_partition(empty)
    with pytest.raises(EmptyTranscript):
        brute_force_partition(empty)
    with pytest.raises(EmptyTranscript):
        partition_from_breaks(empty, [])


def test_to_dict_round_trips_the_interesting_fields():
    t = make_transcript(["Alice", "Bob", "Alice", "Charlie"])
    part = optimal_partition(t)
    data = part.to_dict()
    assert data["breaks"] == list(part.breaks)
    assert data["total_cost_bits"] == part.total_cost
    assert [s["start"] for s in data["scenes"]] == [s.start for s in part.scenes]
    assert all(s["roster"] == sorted(s["roster"]) for s in data["scenes"])
