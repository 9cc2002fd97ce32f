"""Transcript-to-caption alignment.

Similarity between an utterance and a cue is character-level LCS over
lowercased, whitespace-collapsed text, divided by the shorter length.
Dynamic time warping with steps {(1,0), (0,1), (1,1)} finds the
monotone pairing minimizing the summed 1 - similarity; every visited
cell pays its cell cost (no separate gap penalty). Scene breaks then
transfer to time via the cues each scene's lines matched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import kernels
from .errors import EmptySequence, UncoveredScene
from .model import CaptionTrack, Partition


def normalize_text(text: str) -> str:
    """Lowercase and collapse whitespace runs."""
    return " ".join(text.split()).lower()


def lcs_length(a: str, b: str) -> int:
    """Character-level longest-common-subsequence length (normalized)."""
    return kernels.lcs_length_codes(
        kernels.encode_text(normalize_text(a)),
        kernels.encode_text(normalize_text(b)),
    )


def line_similarity(line: str, cue: str) -> float:
    """lcs / min length in [0, 1]; 0 when either side normalizes empty."""
    a, b = normalize_text(line), normalize_text(cue)
    if not a or not b:
        return 0.0
    return lcs_length(a, b) / min(len(a), len(b))


@dataclass(frozen=True)
class Alignment:
    pairs: tuple[tuple[int, int], ...]
    total_cost: float

    def to_dict(self) -> dict:
        return {
            "path": [[line, cue] for line, cue in self.pairs],
            "total_cost": self.total_cost,
        }


@dataclass(frozen=True)
class TimeSpan:
    start: int
    end: int


def dtw_align(lines: Sequence[str], cues: Sequence[str]) -> Alignment:
    """Minimum-cost warping path from (0, 0) to (m-1, k-1).

    Ties prefer the diagonal step, then advancing the line index.
    """
    if not lines or not cues:
        raise EmptySequence("both sequences must be non-empty")
    line_codes = [kernels.encode_text(normalize_text(t)) for t in lines]
    cue_codes = [kernels.encode_text(normalize_text(t)) for t in cues]
    cost = kernels.pair_cost_matrix(line_codes, cue_codes)
    table = kernels.dtw_table(cost)
    path = kernels.dtw_backtrack(table)
    return Alignment(tuple(path), float(table[-1, -1]))


def scene_time_spans(
    partition: Partition, alignment: Alignment, cues: CaptionTrack
) -> list[TimeSpan]:
    """Per-scene [earliest matched cue start, latest matched cue end]."""
    spans: list[TimeSpan] = []
    for scene in partition.scenes:
        matched = [c for line, c in alignment.pairs if scene.start <= line < scene.end]
        if not matched:
            raise UncoveredScene(f"scene [{scene.start}, {scene.end}) matched no cue")
        spans.append(
            TimeSpan(cues.cues[min(matched)].start, cues.cues[max(matched)].end)
        )
    return spans


def spans_to_dicts(spans: Sequence[TimeSpan]) -> list[dict]:
    return [
        {"scene": i, "start_ms": s.start, "end_ms": s.end}
        for i, s in enumerate(spans)
    ]
