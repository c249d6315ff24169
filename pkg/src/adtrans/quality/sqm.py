"""Human-rating support: SQM batch construction, weighted Cohen's kappa, and
per-rater score summaries.

Raters score fluency, adequacy, and usefulness on a 0-6 scale. Batches are
disjoint runs of consecutive segments so raters see context; every rater gets
the same blocks in an independently shuffled order, and each segment's input
modality (text-only vs. text+frames) is assigned uniformly at random and kept
hidden from raters.
"""

from __future__ import annotations

import csv
import hashlib
import io
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..srt import AdScript

DIMENSIONS = ("fluency", "adequacy", "usefulness")
MODALITIES = ("text_only", "text_plus_frames")
SCALE_MAX = 6


class RatingError(ValueError):
    pass


class UndefinedKappaError(RatingError):
    """Both raters constant and identical: chance disagreement is zero."""


@dataclass(frozen=True)
class SqmRating:
    rater_id: str
    segment_id: str
    fluency: int
    adequacy: int
    usefulness: int
    modality: str = "text_only"

    def __post_init__(self) -> None:
        for dim in DIMENSIONS:
            value = getattr(self, dim)
            if not isinstance(value, int) or not 0 <= value <= SCALE_MAX:
                raise RatingError(f"{dim} must be an integer in 0-{SCALE_MAX}, got {value!r}")
        if self.modality not in MODALITIES:
            raise RatingError(f"unknown modality {self.modality!r}")


@dataclass(frozen=True)
class SqmBatchPlan:
    blocks: tuple[tuple[str, ...], ...]
    rater_order: dict[str, tuple[int, ...]]
    modality_by_segment: dict[str, str]
    seed: int
    block_len: int


def _rater_rng(seed: int, rater_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{rater_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def build_sqm_batches(script: AdScript, raters: list[str], seed: int,
                      n_blocks: int = 30, block_len: int = 10) -> SqmBatchPlan:
    """Sample disjoint blocks of consecutive segments, one shared set for all
    raters with per-rater presentation order.

    Placement is uniform over all valid non-overlapping layouts: the leftover
    slack is distributed into the gaps around the blocks via a stars-and-bars
    draw from the seeded generator.
    """
    if not raters:
        raise RatingError("at least one rater required")
    segments = script.segments
    slack = len(segments) - n_blocks * block_len
    if slack < 0:
        raise RatingError(
            f"need {n_blocks * block_len} segments for {n_blocks} blocks of "
            f"{block_len}, got {len(segments)}")
    rng = random.Random(seed)
    separators = sorted(rng.sample(range(slack + n_blocks), n_blocks))
    starts = []
    for i, sep in enumerate(separators):
        gap_total = sep - i  # slack consumed before block i
        starts.append(gap_total + i * block_len)
    blocks = tuple(
        tuple(f"{script.source_id}:{seg.index}" for seg in segments[s:s + block_len])
        for s in starts
    )
    modality_by_segment = {
        seg_id: rng.choice(MODALITIES) for block in blocks for seg_id in block
    }
    rater_order = {}
    for rater in raters:
        order = list(range(n_blocks))
        _rater_rng(seed, rater).shuffle(order)
        rater_order[rater] = tuple(order)
    return SqmBatchPlan(blocks=blocks, rater_order=rater_order,
                        modality_by_segment=modality_by_segment,
                        seed=seed, block_len=block_len)


@dataclass(frozen=True)
class KappaReport:
    kappa: float
    weight_scheme: str
    rater_pair: str = ""
    dimension: str = ""
    n: int = 0

    def __post_init__(self) -> None:
        if not -1.0 - 1e-9 <= self.kappa <= 1.0 + 1e-9:
            raise RatingError(f"kappa {self.kappa} outside [-1, 1]")


def weighted_kappa(ratings_a: list[int], ratings_b: list[int], categories: int = 7,
                   scheme: str = "quadratic", *, rater_pair: str = "",
                   dimension: str = "") -> KappaReport:
    """Weighted Cohen's kappa with linear or quadratic disagreement weights.

    kappa = 1 - sum(w * observed) / sum(w * expected), expected proportions
    from the raters' marginals. Two identical constant vectors make the
    denominator zero; that is reported as an explicit error, not a number.
    """
    if scheme not in ("linear", "quadratic"):
        raise RatingError(f"unknown weight scheme {scheme!r}")
    if len(ratings_a) != len(ratings_b):
        raise RatingError("rating vectors must be aligned")
    if not ratings_a:
        raise RatingError("empty rating vectors")
    for value in (*ratings_a, *ratings_b):
        if not 0 <= value < categories:
            raise RatingError(f"rating {value} outside 0-{categories - 1}")

    n = len(ratings_a)
    observed = Counter(zip(ratings_a, ratings_b))
    marginal_a = Counter(ratings_a)
    marginal_b = Counter(ratings_b)

    def weight(i: int, j: int) -> float:
        d = abs(i - j) / (categories - 1)
        return d * d if scheme == "quadratic" else d

    num = sum(weight(i, j) * count / n for (i, j), count in observed.items())
    den = sum(weight(i, j) * (marginal_a[i] / n) * (marginal_b[j] / n)
              for i in marginal_a for j in marginal_b)
    if den == 0:
        raise UndefinedKappaError(
            "expected disagreement is zero (both raters constant and identical)")
    return KappaReport(kappa=1.0 - num / den, weight_scheme=scheme,
                       rater_pair=rater_pair, dimension=dimension, n=n)


@dataclass(frozen=True)
class SummaryRow:
    rater_id: str
    dimension: str
    modality: str
    mean: float
    n: int


def rating_summary(ratings: list[SqmRating]) -> list[SummaryRow]:
    """Mean score per (rater, dimension, modality)."""
    if not ratings:
        raise RatingError("no ratings to summarize")
    groups: dict[tuple[str, str, str], list[int]] = {}
    for rating in ratings:
        for dim in DIMENSIONS:
            groups.setdefault((rating.rater_id, dim, rating.modality), []).append(
                getattr(rating, dim))
    return [
        SummaryRow(rater_id=rater, dimension=dim, modality=modality,
                   mean=sum(values) / len(values), n=len(values))
        for (rater, dim, modality), values in sorted(groups.items())
    ]


CSV_COLUMNS = ["rater_id", "segment_id", "modality", "fluency", "adequacy", "usefulness"]


def ratings_to_csv(ratings: list[SqmRating]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in ratings:
        writer.writerow({"rater_id": r.rater_id, "segment_id": r.segment_id,
                         "modality": r.modality, "fluency": r.fluency,
                         "adequacy": r.adequacy, "usefulness": r.usefulness})
    return buf.getvalue()


def ratings_from_csv(text: str) -> list[SqmRating]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise RatingError(f"ratings CSV missing columns: {sorted(missing)}")
    return [
        SqmRating(rater_id=row["rater_id"], segment_id=row["segment_id"],
                  modality=row["modality"], fluency=int(row["fluency"]),
                  adequacy=int(row["adequacy"]), usefulness=int(row["usefulness"]))
        for row in reader
    ]


def load_ratings_csv(path: str | Path) -> list[SqmRating]:
    return ratings_from_csv(Path(path).read_text(encoding="utf-8"))
