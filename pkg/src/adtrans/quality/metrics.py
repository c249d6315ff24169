"""Reference-based MT metrics on a 0-100 scale.

All three metrics share one documented tokenization (lowercase, punctuation
split off). The METEOR variant here has no synonym stage (exact + stemmed
matching only), which keeps scoring deterministic and dependency-free; report
headers call it ``meteor_lite`` to flag the divergence.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from .stem import porter_stem

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_WS_RE = re.compile(r"\s+")

BLEU_MAX_ORDER = 4
CHRF_MAX_ORDER = 6
CHRF_BETA = 2.0


class MetricError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _check_aligned(hypotheses: list[str], references: list[str]) -> None:
    if len(hypotheses) != len(references):
        raise MetricError(f"hypothesis/reference count mismatch: "
                          f"{len(hypotheses)} vs {len(references)}")
    if not hypotheses:
        raise MetricError("empty corpus")


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses: list[str], references: list[str]) -> float:
    """Corpus-level BLEU: geometric mean of clipped 1-4-gram precisions times
    the brevity penalty.

    Smoothing is fixed: an order with hypothesis n-grams but zero matches
    scores 1/(2 * total); an order with no hypothesis n-grams at all (corpus
    shorter than n) is excluded from the mean.
    """
    _check_aligned(hypotheses, references)
    matches = [0] * (BLEU_MAX_ORDER + 1)
    totals = [0] * (BLEU_MAX_ORDER + 1)
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_tokens = tokenize(hyp)
        ref_tokens = tokenize(ref)
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, BLEU_MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp_tokens, n)
            overlap = hyp_counts & _ngrams(ref_tokens, n)
            matches[n] += sum(overlap.values())
            totals[n] += sum(hyp_counts.values())
    if hyp_len == 0:
        return 0.0
    log_precisions = []
    for n in range(1, BLEU_MAX_ORDER + 1):
        if totals[n] == 0:
            continue
        precision = matches[n] / totals[n] if matches[n] else 1.0 / (2 * totals[n])
        log_precisions.append(math.log(precision))
    if not log_precisions:
        return 0.0
    brevity = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(sum(log_precisions) / len(log_precisions))


def _char_ngrams(text: str, n: int) -> Counter:
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def chrf(hypotheses: list[str], references: list[str],
         order: int = CHRF_MAX_ORDER, beta: float = CHRF_BETA) -> float:
    """chrF: F(beta=2) per character n-gram order 1-6 on corpus-aggregated
    counts, averaged over orders. Whitespace is removed before n-gram
    extraction; orders where either side has no n-grams are skipped."""
    _check_aligned(hypotheses, references)
    hyp_clean = [_WS_RE.sub("", h) for h in hypotheses]
    ref_clean = [_WS_RE.sub("", r) for r in references]
    beta_sq = beta * beta
    f_scores = []
    for n in range(1, order + 1):
        hyp_total = ref_total = overlap = 0
        for h, r in zip(hyp_clean, ref_clean):
            hyp_counts = _char_ngrams(h, n)
            ref_counts = _char_ngrams(r, n)
            hyp_total += sum(hyp_counts.values())
            ref_total += sum(ref_counts.values())
            overlap += sum((hyp_counts & ref_counts).values())
        if hyp_total == 0 or ref_total == 0:
            continue
        precision = overlap / hyp_total
        recall = overlap / ref_total
        if precision + recall == 0:
            f_scores.append(0.0)
        else:
            f_scores.append((1 + beta_sq) * precision * recall
                            / (beta_sq * precision + recall))
    if not f_scores:
        return 0.0
    return 100.0 * sum(f_scores) / len(f_scores)


def _align_greedy(hyp_tokens: list[str], ref_tokens: list[str]) -> list[tuple[int, int]]:
    """Two-stage unigram alignment: exact matches first, then Porter-stem
    matches among the leftovers. Greedy left-to-right, earliest free
    reference token wins."""
    free_ref = list(range(len(ref_tokens)))
    pairs: list[tuple[int, int]] = []
    matched_hyp: set[int] = set()
    for key in (lambda t: t, porter_stem):
        ref_keys = {j: key(ref_tokens[j]) for j in free_ref}
        for i, token in enumerate(hyp_tokens):
            if i in matched_hyp:
                continue
            want = key(token)
            for j in free_ref:
                if ref_keys[j] == want:
                    pairs.append((i, j))
                    matched_hyp.add(i)
                    free_ref.remove(j)
                    break
    return sorted(pairs)


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_lite(hypotheses: list[str], references: list[str]) -> float:
    """METEOR without the synonym stage, averaged over segments.

    Per segment: Fmean = 10PR / (R + 9P) over unigram matches, discounted by
    the fragmentation penalty 0.5 * (chunks / matches)^3.
    """
    _check_aligned(hypotheses, references)
    scores = []
    for hyp, ref in zip(hypotheses, references):
        hyp_tokens = tokenize(hyp)
        ref_tokens = tokenize(ref)
        if not hyp_tokens or not ref_tokens:
            scores.append(0.0)
            continue
        pairs = _align_greedy(hyp_tokens, ref_tokens)
        m = len(pairs)
        if m == 0:
            scores.append(0.0)
            continue
        precision = m / len(hyp_tokens)
        recall = m / len(ref_tokens)
        fmean = 10 * precision * recall / (recall + 9 * precision)
        penalty = 0.5 * (_count_chunks(pairs) / m) ** 3
        scores.append(fmean * (1 - penalty))
    return 100.0 * sum(scores) / len(scores)


@dataclass(frozen=True)
class MetricReport:
    bleu: float
    meteor: float
    chrf: float
    n_segments: int

    def __post_init__(self) -> None:
        for name in ("bleu", "meteor", "chrf"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise MetricError(f"{name} score {value} outside [0, 100]")

    def to_report(self) -> dict:
        return {"bleu": round(self.bleu, 2), "meteor_lite": round(self.meteor, 2),
                "chrf": round(self.chrf, 2), "n_segments": self.n_segments}


def score_corpus(hypotheses: list[str], references: list[str]) -> MetricReport:
    return MetricReport(bleu=bleu(hypotheses, references),
                        meteor=meteor_lite(hypotheses, references),
                        chrf=chrf(hypotheses, references),
                        n_segments=len(hypotheses))


def render_metric_table(reports: dict[str, MetricReport]) -> str:
    """Aligned table, one row per system/pair label."""
    header = f"{'System':<28} {'BLEU':>7} {'METEOR*':>8} {'chrF':>7} {'n':>6}"
    lines = [header, "-" * len(header)]
    for label, report in reports.items():
        lines.append(f"{label:<28} {report.bleu:>7.2f} {report.meteor:>8.2f} "
                     f"{report.chrf:>7.2f} {report.n_segments:>6}")
    lines.append("* meteor_lite: exact + stemmed matching, no synonym stage")
    return "\n".join(lines)
