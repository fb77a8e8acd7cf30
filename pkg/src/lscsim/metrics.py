"""Sense frequency distributions and the graded / binary change scores derived from them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .corpus import LemmaKey

__all__ = [
    "DEFAULT_K",
    "SenseFrequencyDistribution",
    "ProbabilityDistribution",
    "ChangeScores",
    "build_sfd",
    "normalize",
    "jsd",
    "graded_change",
    "binary_change",
    "change_scores",
    "relative_error",
]

DEFAULT_K = 0.1


@dataclass(frozen=True)
class SenseFrequencyDistribution:
    """Per-sense use counts of one lemma over a fixed sense sequence."""

    senses: tuple[str, ...]
    counts: tuple[int, ...]
    lemma: LemmaKey | None = None

    def __post_init__(self):
        object.__setattr__(self, "senses", tuple(self.senses))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.senses) != len(self.counts):
            raise ValueError("senses and counts differ in length")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class ProbabilityDistribution:
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be non-negative")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(self.probs)!r}, not 1")

    def __len__(self):
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)


@dataclass(frozen=True)
class ChangeScores:
    graded: float
    binary: int
    threshold_k: float = DEFAULT_K


def build_sfd(uses: Iterable[str], senses: Sequence[str], lemma: LemmaKey | None = None) -> SenseFrequencyDistribution:
    """Count ``uses`` (sense keys) over the sense sequence ``senses``."""
    position = {s: i for i, s in enumerate(senses)}
    counts = [0] * len(senses)
    for sense in uses:
        try:
            counts[position[sense]] += 1
        except KeyError:
            raise ValueError(f"sense {sense!r} is not in the sense sequence {tuple(senses)}") from None
    return SenseFrequencyDistribution(tuple(senses), tuple(counts), lemma)


def normalize(sfd: SenseFrequencyDistribution) -> ProbabilityDistribution:
    total = sfd.total
    if total == 0:
        raise ValueError("cannot normalize an all-zero sense frequency distribution")
    return ProbabilityDistribution(tuple(c / total for c in sfd.counts))


def _kl_to_mixture(p: Sequence[float], m: Sequence[float]) -> float:
    return math.fsum(pi * math.log2(pi / mi) for pi, mi in zip(p, m) if pi > 0)


def jsd(p: ProbabilityDistribution | Sequence[float], q: ProbabilityDistribution | Sequence[float]) -> float:
    """Jensen-Shannon distance with base-2 logarithms, in [0, 1]."""
    p = tuple(p)
    q = tuple(q)
    if len(p) != len(q):
        raise ValueError(f"distributions differ in length ({len(p)} vs {len(q)})")
    if p == q:
        return 0.0
    m = [(a + b) / 2 for a, b in zip(p, q)]
    divergence = 0.5 * _kl_to_mixture(p, m) + 0.5 * _kl_to_mixture(q, m)
    if not any(a > 0 and b > 0 for a, b in zip(p, q)):
        # Disjoint supports: the divergence is exactly one bit.
        return 1.0
    return math.sqrt(min(1.0, max(0.0, divergence)))


def _check_pair(t1: SenseFrequencyDistribution, t2: SenseFrequencyDistribution) -> None:
    if t1.senses != t2.senses:
        raise ValueError(f"sense sequences differ: {t1.senses} vs {t2.senses}")
    if t1.lemma is not None and t2.lemma is not None and t1.lemma != t2.lemma:
        raise ValueError(f"lemmas differ: {t1.lemma} vs {t2.lemma}")


def graded_change(t1: SenseFrequencyDistribution, t2: SenseFrequencyDistribution) -> float:
    _check_pair(t1, t2)
    return jsd(normalize(t1), normalize(t2))


def binary_change(t1: SenseFrequencyDistribution, t2: SenseFrequencyDistribution, k: float = DEFAULT_K) -> int:
    """1 if some sense is absent on one side and has probability >= k on the other."""
    _check_pair(t1, t2)
    n1, n2 = t1.total, t2.total
    if n1 == 0 or n2 == 0:
        raise ValueError("binary change is undefined for an all-zero distribution")
    # Exact rational comparison against k's decimal value; zero is tested on counts.
    threshold = Fraction(repr(float(k)))
    for c1, c2 in zip(t1.counts, t2.counts):
        if c1 == 0 and Fraction(c2, n2) >= threshold:
            return 1
        if c2 == 0 and Fraction(c1, n1) >= threshold:
            return 1
    return 0


def change_scores(t1: SenseFrequencyDistribution, t2: SenseFrequencyDistribution, k: float = DEFAULT_K) -> ChangeScores:
    return ChangeScores(graded_change(t1, t2), binary_change(t1, t2, k), k)


def relative_error(total: int, annotated: int) -> float:
    """Share of a lemma's occurrences that lack a sense annotation, relative to the annotated ones."""
    if annotated <= 0:
        raise ValueError("relative error needs at least one annotated use")
    return (total - annotated) / annotated
