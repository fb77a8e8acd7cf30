"""Scoring change predictions against gold: Spearman's rho, average precision and baselines."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .corpus import LemmaKey

__all__ = [
    "PredictionSet",
    "GradedResult",
    "RandomBaseline",
    "CellScore",
    "FamilyRow",
    "EvaluationReport",
    "spearman",
    "score_graded",
    "average_precision",
    "poly_baseline",
    "freq_baseline",
    "random_baseline_ap",
    "expected_random_ap",
    "aggregate",
    "evaluate_cell",
    "load_predictions",
    "write_report",
    "baseline_rows",
    "split_cell_id",
    "measure_family",
    "format_report",
    "format_summary",
]

log = logging.getLogger(__name__)

MIN_OVERLAP = 3
SIM_FAMILY = "SIM"


@dataclass(frozen=True)
class PredictionSet:
    """Change scores for lemmas; ``None`` marks a lemma the model could not score."""

    provenance: str
    scores: Mapping[LemmaKey, float | None]

    def __post_init__(self):
        # A mapping cannot hold duplicate keys; copy so later mutation of the input is harmless.
        object.__setattr__(self, "scores", dict(self.scores))
        for key, value in self.scores.items():
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{self.provenance}: non-finite score for {key}")

    @classmethod
    def from_pairs(cls, provenance: str, pairs: Iterable[tuple[LemmaKey, float | None]]) -> "PredictionSet":
        scores: dict = {}
        for key, value in pairs:
            if key in scores:
                raise ValueError(f"{provenance}: duplicate lemma {key}")
            scores[key] = value
        return cls(provenance, scores)


def _overlap(pred: PredictionSet, gold: Mapping[LemmaKey, float]) -> list[LemmaKey]:
    return sorted(k for k in gold if pred.scores.get(k) is not None)


@dataclass(frozen=True)
class GradedResult:
    rho: float
    coverage: float
    n: int
    degenerate: bool = False


def score_graded(pred: PredictionSet, gold: Mapping[LemmaKey, float]) -> GradedResult:
    """Spearman's rho with coverage; a constant ranking scores 0 and is flagged degenerate."""
    keys = _overlap(pred, gold)
    if len(keys) < MIN_OVERLAP:
        raise ValueError(f"{pred.provenance}: {len(keys)} lemmas with prediction and gold, need {MIN_OVERLAP}")
    coverage = len(keys) / len(gold)
    x = rankdata([pred.scores[k] for k in keys])
    y = rankdata([gold[k] for k in keys])
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return GradedResult(0.0, coverage, len(keys), degenerate=True)
    x, y = x - x.mean(), y - y.mean()
    rho = float(x @ y / math.sqrt((x @ x) * (y @ y)))
    return GradedResult(min(1.0, max(-1.0, rho)), coverage, len(keys))


def spearman(pred: PredictionSet, gold: Mapping[LemmaKey, float]) -> float:
    """Spearman rank correlation over lemmas having both a prediction and a gold score."""
    return score_graded(pred, gold).rho


def average_precision(pred: PredictionSet, gold: Mapping[LemmaKey, int]) -> float:
    """Mean precision at the rank of each positive; ranks by score descending, then lemma key."""
    keys = _overlap(pred, gold)
    ranked = sorted(keys, key=lambda k: -pred.scores[k])  # stable: keys are already sorted
    hits = 0
    precisions = []
    for rank, key in enumerate(ranked, start=1):
        if gold[key]:
            hits += 1
            precisions.append(hits / rank)
    if not precisions:
        raise ValueError(f"{pred.provenance}: no positive labels among predicted lemmas")
    return math.fsum(precisions) / len(precisions)


def _field(record, name):
    return record[name] if isinstance(record, Mapping) else getattr(record, name)


def _sense_counts(record) -> tuple[Sequence[int], Sequence[int]]:
    t1, t2 = _field(record, "t1"), _field(record, "t2")
    if hasattr(t1, "counts"):
        return t1.counts, t2.counts
    return t1, t2


def poly_baseline(records: Iterable) -> PredictionSet:
    """Number of senses attested on either side of the split."""
    scores = {}
    for r in records:
        c1, c2 = _sense_counts(r)
        scores[_field(r, "lemma")] = float(sum(1 for a, b in zip(c1, c2) if a + b > 0))
    return PredictionSet("POLY", scores)


def freq_baseline(records: Iterable, token_counts: tuple[int, int]) -> PredictionSet:
    """Normalized frequency difference |f1/N1 - f2/N2| / max(f1/N1, f2/N2)."""
    n1, n2 = token_counts
    if n1 <= 0 or n2 <= 0:
        raise ValueError(f"corpus token totals must be positive, got {token_counts}")
    scores = {}
    for r in records:
        r1, r2 = _field(r, "freq_c1") / n1, _field(r, "freq_c2") / n2
        top = max(r1, r2)
        scores[_field(r, "lemma")] = abs(r1 - r2) / top if top > 0 else 0.0
    return PredictionSet("FREQ", scores)


@dataclass(frozen=True)
class RandomBaseline:
    mean: float
    stderr: float
    trials: int
    positives: int
    n: int

    @property
    def analytic(self) -> float:
        """Share of positives, the reference value quoted for random rankings."""
        return self.positives / self.n

    @property
    def expected(self) -> float:
        return expected_random_ap(self.positives, self.n)


def expected_random_ap(positives: int, n: int) -> float:
    """Exact expected AP of a uniformly random ranking of ``n`` items with ``positives`` positives.

    The positive at the i-th hit sits at rank p; E[i/p] summed over hits gives
    (1/n) * (H_n * (1 - (R-1)/(n-1)) + n * (R-1)/(n-1)).
    """
    if not 0 < positives <= n:
        raise ValueError("need 0 < positives <= n")
    if n == 1:
        return 1.0
    harmonic = math.fsum(1.0 / i for i in range(1, n + 1))
    share = (positives - 1) / (n - 1)
    return (harmonic * (1 - share) + n * share) / n


def random_baseline_ap(labels: Sequence[int], trials: int = 1000, rng: np.random.Generator | None = None) -> RandomBaseline:
    """Monte-Carlo mean AP over ``trials`` uniformly random rankings of ``labels``."""
    labels = np.asarray(labels, dtype=bool)
    positives = int(labels.sum())
    if positives == 0:
        raise ValueError("no positive labels")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)
    n = len(labels)
    orders = rng.permuted(np.tile(np.arange(n), (trials, 1)), axis=1)
    hits = labels[orders]
    ranks = np.arange(1, n + 1)
    precision = np.cumsum(hits, axis=1) / ranks
    aps = (precision * hits).sum(axis=1) / positives
    stderr = float(aps.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return RandomBaseline(float(aps.mean()), stderr, trials, positives, n)


# -- grid evaluation ----------------------------------------------------------

_ITERATION = re.compile(r"^(?P<cell>.+)\+i(?P<it>\d+)$")


def split_cell_id(name: str) -> tuple[str, int]:
    """'SGNS+OP+CD+d30+i2' -> ('SGNS+OP+CD+d30', 2); names without an iteration count as 0."""
    m = _ITERATION.match(name)
    return (m.group("cell"), int(m.group("it"))) if m else (name, 0)


def measure_family(cell: str) -> str:
    parts = cell.split("+")
    return parts[2] if len(parts) >= 3 and parts[2] in ("CD", "LND") else "OTHER"


@dataclass(frozen=True)
class CellScore:
    """Scores of one prediction file (one grid cell at one iteration)."""

    cell: str
    iteration: int
    rho: float | None
    ap: float | None
    coverage: float
    degenerate: bool = False


def evaluate_cell(pred: PredictionSet, graded: Mapping[LemmaKey, float], binary: Mapping[LemmaKey, int]) -> CellScore:
    cell, it = split_cell_id(pred.provenance)
    coverage = sum(pred.scores.get(k) is not None for k in graded) / len(graded) if graded else 0.0
    rho = ap = None
    degenerate = False
    try:
        result = score_graded(pred, graded)
        rho, degenerate = result.rho, result.degenerate
    except ValueError as exc:
        log.warning("%s", exc)
    try:
        ap = average_precision(pred, binary)
    except ValueError as exc:
        log.warning("%s", exc)
    return CellScore(cell, it, rho, ap, coverage, degenerate)


@dataclass(frozen=True)
class CellRow:
    """One grid cell with scores averaged over its iterations."""

    cell: str
    iterations: int
    rho: float | None
    ap: float | None
    coverage: float
    degenerate: bool


@dataclass(frozen=True)
class FamilyRow:
    family: str
    rho_mean: float | None
    rho_best: float | None
    rho_model: str | None
    ap_mean: float | None
    ap_best: float | None
    ap_model: str | None


@dataclass
class EvaluationReport:
    cells: list[CellRow]
    families: list[FamilyRow]
    baselines: list[FamilyRow]
    iterations: list[CellScore] = field(default_factory=list)
    random: RandomBaseline | None = None

    @property
    def summary(self) -> list[FamilyRow]:
        return self.families + self.baselines


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    return fmean(values) if values else None


def _best(rows: list[CellRow], attr: str):
    scored = [r for r in rows if getattr(r, attr) is not None]
    if not scored:
        return None, None
    # Highest score; ties go to the lexicographically first cell id.
    top = min(scored, key=lambda r: (-getattr(r, attr), r.cell))
    return getattr(top, attr), top.cell


def _family_row(name: str, rows: list[CellRow]) -> FamilyRow:
    rho_best, rho_model = _best(rows, "rho")
    ap_best, ap_model = _best(rows, "ap")
    return FamilyRow(
        name, _mean_or_none(r.rho for r in rows), rho_best, rho_model,
        _mean_or_none(r.ap for r in rows), ap_best, ap_model,
    )


def aggregate(scores: Iterable[CellScore], baselines: Sequence[FamilyRow] = ()) -> EvaluationReport:
    """Average each cell over its iterations, then take mean and best per measure family."""
    scores = sorted(scores, key=lambda s: (s.cell, s.iteration))
    by_cell: dict[str, list[CellScore]] = {}
    for s in scores:
        by_cell.setdefault(s.cell, []).append(s)
    cells = [
        CellRow(
            cell, len(group),
            _mean_or_none(s.rho for s in group),
            _mean_or_none(s.ap for s in group),
            fmean(s.coverage for s in group),
            any(s.degenerate for s in group),
        )
        for cell, group in by_cell.items()
    ]
    families = []
    if cells:
        families.append(_family_row(SIM_FAMILY, cells))
        for fam in sorted({measure_family(c.cell) for c in cells}):
            families.append(_family_row(fam, [c for c in cells if measure_family(c.cell) == fam]))
    return EvaluationReport(cells, families, list(baselines), scores)


def baseline_rows(
    testset: Sequence,
    token_counts: tuple[int, int],
    trials: int = 1000,
    seed: int = 0,
) -> tuple[list[FamilyRow], RandomBaseline | None]:
    """POLY, FREQ and RAND rows over testset records (dicts from ``read_gold`` or gold records)."""
    graded = {_field(r, "lemma"): _field(r, "graded") for r in testset}
    binary = {_field(r, "lemma"): _field(r, "binary") for r in testset}
    rows = []
    for pred in (poly_baseline(testset), freq_baseline(testset, token_counts)):
        s = evaluate_cell(pred, graded, binary)
        rows.append(FamilyRow(pred.provenance, s.rho, s.rho, None, s.ap, s.ap, None))
    rand = None
    labels = [binary[k] for k in sorted(binary)]
    if any(labels):
        rand = random_baseline_ap(labels, trials, np.random.default_rng(seed))
        rows.append(FamilyRow("RAND", None, None, None, rand.mean, rand.mean, None))
    else:
        log.warning("testset has no binary positives; RAND is undefined")
        rows.append(FamilyRow("RAND", None, None, None, None, None, None))
    return rows, rand


def load_predictions(directory) -> list[PredictionSet]:
    """Every ``*.tsv`` prediction file in ``directory``, named by grid cell and iteration."""
    from .embeddings.grid import read_predictions

    return [PredictionSet(p.stem, read_predictions(p)) for p in sorted(Path(directory).glob("*.tsv"))]


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def format_summary(report: EvaluationReport) -> str:
    header = ("measure", "graded_mean", "graded_best", "graded_model", "binary_mean", "binary_best", "binary_model")
    lines = ["\t".join(header)]
    for r in report.summary:
        lines.append("\t".join(_fmt(v) for v in (
            r.family, r.rho_mean, r.rho_best, r.rho_model, r.ap_mean, r.ap_best, r.ap_model,
        )))
    return "\n".join(lines) + "\n"


def format_report(report: EvaluationReport) -> str:
    header = ("cell", "family", "iterations", "rho", "ap", "coverage", "degenerate", "note")
    lines = ["\t".join(header)]
    for c in report.cells:
        lines.append("\t".join(_fmt(v) for v in (
            c.cell, measure_family(c.cell), c.iterations, c.rho, c.ap, c.coverage, int(c.degenerate), "-",
        )))
    for b in report.baselines:
        note = "-"
        if b.family == "RAND" and report.random is not None:
            r = report.random
            note = (f"trials={r.trials} se={r.stderr:.6f} positives={r.positives} n={r.n} "
                    f"positives/n={r.analytic:.6f} exact={r.expected:.6f}")
        lines.append("\t".join(_fmt(v) for v in (b.family, "BASELINE", "-", b.rho_best, b.ap_best, 1.0, 0, note)))
    return "\n".join(lines) + "\n"


def format_iterations(report: EvaluationReport) -> str:
    header = ("cell", "iteration", "rho", "ap", "coverage", "degenerate")
    lines = ["\t".join(header)]
    for s in report.iterations:
        lines.append("\t".join(_fmt(v) for v in (s.cell, s.iteration, s.rho, s.ap, s.coverage, int(s.degenerate))))
    return "\n".join(lines) + "\n"


def write_report(report: EvaluationReport, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / "report.tsv",
        "summary": out / "summary.tsv",
        "iterations": out / "report.iterations.tsv",
    }
    for key, text in (
        ("report", format_report(report)),
        ("summary", format_summary(report)),
        ("iterations", format_iterations(report)),
    ):
        with open(paths[key], "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return paths
