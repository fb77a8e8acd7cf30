"""Split a sense-annotated corpus into two sub-corpora with simulated sense change.

Target lemmas (annotated frequency inside a configured band, at least two
senses) get their sense inventory shuffled and cut into two non-empty
subsets; sentences using a sense from the first subset are sent to corpus 1,
the rest to corpus 2. All other sentences are shuffled and halved. Gold change
scores are then read off the realized split, so they are correct regardless of
how well the target assignment succeeded.
"""

from __future__ import annotations

import logging
import math
import os
import re
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import AnnotatedCorpus, LemmaKey, extract_plain_tokens, lemma_inventory
from .metrics import (
    DEFAULT_K,
    SenseFrequencyDistribution,
    binary_change,
    build_sfd,
    graded_change,
    relative_error,
)

__all__ = [
    "RNG_ALGORITHM",
    "SplitConfig",
    "TargetPlan",
    "Assignment",
    "Split",
    "GoldRecord",
    "Simulation",
    "make_rng",
    "select_targets",
    "split_corpus",
    "compute_gold",
    "filter_testset",
    "simulate",
    "export",
    "GOLD_HEADER",
    "read_token_counts",
    "format_gold",
    "read_gold",
]

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64"
FILL = "fill"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SplitConfig:
    seed: int = 0
    target_freq_min: int = 100
    target_freq_max: int = 1000
    binary_k: float = DEFAULT_K
    re_max: float = 0.5
    testset_freq_min: int = 50

    def __post_init__(self):
        if not 0 < self.target_freq_min <= self.target_freq_max:
            raise ValueError("need 0 < target_freq_min <= target_freq_max")
        if self.re_max <= 0:
            raise ValueError("re_max must be positive")
        if self.testset_freq_min <= 0:
            raise ValueError("testset_freq_min must be positive")
        if not 0 < self.binary_k <= 1:
            raise ValueError("binary_k must lie in (0, 1]")


@dataclass(frozen=True)
class TargetPlan:
    lemma: LemmaKey
    senses_c1: frozenset[str]
    senses_c2: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "senses_c1", frozenset(self.senses_c1))
        object.__setattr__(self, "senses_c2", frozenset(self.senses_c2))
        if not self.senses_c1 or not self.senses_c2:
            raise ValueError(f"{self.lemma}: both sense subsets must be non-empty")
        if self.senses_c1 & self.senses_c2:
            raise ValueError(f"{self.lemma}: sense subsets overlap")

    def side_of(self, sense: str) -> int:
        if sense in self.senses_c1:
            return 1
        if sense in self.senses_c2:
            return 2
        raise KeyError(f"{self.lemma}: sense {sense!r} not covered by the plan")


@dataclass(frozen=True)
class Assignment:
    sentence_id: str
    side: int
    rule: str
    # Targets whose demanded side lost to an earlier decision.
    conflicts: tuple[LemmaKey, ...] = ()


@dataclass(frozen=True)
class Split:
    c1: tuple[str, ...]
    c2: tuple[str, ...]
    log: tuple[Assignment, ...]

    def side(self) -> dict[str, int]:
        return {a.sentence_id: a.side for a in self.log}

    @property
    def conflicts(self) -> list[tuple[str, LemmaKey]]:
        return [(a.sentence_id, k) for a in self.log for k in a.conflicts]


@dataclass(frozen=True)
class GoldRecord:
    lemma: LemmaKey
    t1: SenseFrequencyDistribution
    t2: SenseFrequencyDistribution
    graded: float | None
    binary: int | None
    freq_c1: int
    freq_c2: int
    annotated_c1: int
    annotated_c2: int
    re: float
    is_target: bool
    in_testset: bool = False

    @property
    def scorable(self) -> bool:
        return self.graded is not None


@dataclass
class Simulation:
    config: SplitConfig
    plans: list[TargetPlan]
    split: Split
    records: list[GoldRecord]
    token_counts: tuple[int, int] = (0, 0)

    @property
    def testset(self) -> list[GoldRecord]:
        return [r for r in self.records if r.in_testset]

    def export(self, corpus: AnnotatedCorpus, out_dir) -> dict[str, Path]:
        return export(corpus, self.split, self.records, out_dir, self.config)


def select_targets(corpus: AnnotatedCorpus, config: SplitConfig, rng: np.random.Generator) -> list[TargetPlan]:
    """Plan a sense partition for every lemma whose annotated frequency lies in the target band."""
    plans = []
    for key, entry in lemma_inventory(corpus).items():
        if not config.target_freq_min <= entry.annotated <= config.target_freq_max:
            continue
        if len(entry.senses) < 2:
            continue
        order = rng.permutation(len(entry.senses))
        cut = int(rng.integers(1, len(entry.senses)))
        shuffled = [entry.senses[i] for i in order]
        plans.append(TargetPlan(key, frozenset(shuffled[:cut]), frozenset(shuffled[cut:])))
    return plans


def split_corpus(corpus: AnnotatedCorpus, plans: list[TargetPlan], rng: np.random.Generator) -> Split:
    """Assign every sentence to corpus 1 or 2.

    Targets are processed in sorted lemma order; the first target to claim a
    sentence decides its side and later contrary demands are logged as
    conflicts. Unclaimed sentences are shuffled and halved, corpus 1 taking
    the extra sentence when the count is odd.
    """
    decided: dict[str, tuple[int, str]] = {}
    conflicts: dict[str, list[LemmaKey]] = {}
    for plan in sorted(plans, key=lambda p: p.lemma):
        rule = f"target:{plan.lemma}"
        for sid, _, sense in corpus.lemma_index.get(plan.lemma, ()):
            side = plan.side_of(sense)
            if sid not in decided:
                decided[sid] = (side, rule)
            elif decided[sid][0] != side:
                bucket = conflicts.setdefault(sid, [])
                if plan.lemma not in bucket:
                    bucket.append(plan.lemma)

    remaining = [sid for sid in corpus.ids if sid not in decided]
    order = rng.permutation(len(remaining))
    half = math.ceil(len(remaining) / 2)
    for rank, i in enumerate(order):
        decided[remaining[i]] = (1 if rank < half else 2, FILL)

    assignments = tuple(
        Assignment(sid, decided[sid][0], decided[sid][1], tuple(conflicts.get(sid, ())))
        for sid in corpus.ids
    )
    c1 = tuple(a.sentence_id for a in assignments if a.side == 1)
    c2 = tuple(a.sentence_id for a in assignments if a.side == 2)
    if conflicts:
        log.info("step (i) conflicts in %d sentences", len(conflicts))
    return Split(c1, c2, assignments)


def _plain_lines(corpus: AnnotatedCorpus, ids) -> list[str]:
    return [" ".join(extract_plain_tokens(corpus.sentence(sid))) for sid in ids]


def _token_counter(lines: list[str]) -> Counter:
    counts: Counter = Counter()
    for line in lines:
        counts.update(line.split())
    return counts


def compute_gold(
    corpus: AnnotatedCorpus,
    split: Split,
    config: SplitConfig,
    plans: list[TargetPlan] = (),
    *,
    lines: tuple[list[str], list[str]] | None = None,
) -> list[GoldRecord]:
    """Gold records for every annotated lemma, computed from the realized split.

    Lemmas lacking annotated uses on one side get ``graded``/``binary`` of
    None. Frequencies count the lemma's word form in the exported corpora.
    """
    side = split.side()
    targets = {p.lemma for p in plans}
    if lines is None:
        lines = (_plain_lines(corpus, split.c1), _plain_lines(corpus, split.c2))
    freq1, freq2 = _token_counter(lines[0]), _token_counter(lines[1])

    records = []
    for key in sorted(corpus.lemma_index):
        uses = corpus.lemma_index[key]
        senses = tuple(sorted({u[2] for u in uses}))
        t1 = build_sfd((u[2] for u in uses if side[u[0]] == 1), senses, key)
        t2 = build_sfd((u[2] for u in uses if side[u[0]] == 2), senses, key)
        graded = binary = None
        if t1.total and t2.total:
            graded = graded_change(t1, t2)
            binary = binary_change(t1, t2, config.binary_k)
        f1, f2 = freq1.get(key.lemma, 0), freq2.get(key.lemma, 0)
        records.append(GoldRecord(
            lemma=key, t1=t1, t2=t2, graded=graded, binary=binary,
            freq_c1=f1, freq_c2=f2,
            annotated_c1=t1.total, annotated_c2=t2.total,
            re=relative_error(f1 + f2, len(uses)),
            is_target=key in targets,
        ))
    return records


def filter_testset(records: list[GoldRecord], config: SplitConfig) -> list[GoldRecord]:
    """Flag the records that pass the annotation-noise and frequency filters."""
    return [
        replace(r, in_testset=(
            r.scorable
            and r.re < config.re_max
            and min(r.freq_c1, r.freq_c2) >= config.testset_freq_min
        ))
        for r in records
    ]


def simulate(corpus: AnnotatedCorpus, config: SplitConfig) -> Simulation:
    rng = make_rng(config.seed)
    plans = select_targets(corpus, config, rng)
    split = split_corpus(corpus, plans, rng)
    lines = (_plain_lines(corpus, split.c1), _plain_lines(corpus, split.c2))
    records = filter_testset(compute_gold(corpus, split, config, plans, lines=lines), config)
    counts = tuple(sum(len(line.split()) for line in side) for side in lines)
    log.info(
        "split %d sentences into %d/%d (%d/%d tokens); %d targets, %d testset lemmas",
        len(corpus), len(split.c1), len(split.c2), *counts, len(plans),
        sum(r.in_testset for r in records),
    )
    return Simulation(config, plans, split, records, counts)


# -- files -----------------------------------------------------------------

GOLD_HEADER = (
    "lemma", "pos", "graded", "binary", "freq_c1", "freq_c2", "re",
    "is_target", "in_testset", "senses", "t1", "t2",
)


def _gold_row(r: GoldRecord) -> str:
    if any("," in sense for sense in r.t1.senses):
        raise ValueError(f"{r.lemma}: sense keys containing ',' cannot be written to gold files")
    graded = "NA" if r.graded is None else f"{r.graded:.6f}"
    binary = "NA" if r.binary is None else str(r.binary)
    return "\t".join((
        r.lemma.lemma, r.lemma.pos, graded, binary, str(r.freq_c1), str(r.freq_c2),
        f"{r.re:.6f}", str(int(r.is_target)), str(int(r.in_testset)),
        ",".join(r.t1.senses), ",".join(map(str, r.t1.counts)), ",".join(map(str, r.t2.counts)),
    ))


def format_gold(records: list[GoldRecord], token_counts: tuple[int, int] | None = None) -> str:
    """Gold table; ``token_counts`` (corpus sizes) go into a leading comment line."""
    head = ""
    if token_counts is not None:
        head = f"# tokens_c1={token_counts[0]} tokens_c2={token_counts[1]}\n"
    return head + "\t".join(GOLD_HEADER) + "\n" + "".join(_gold_row(r) + "\n" for r in records)


def read_token_counts(path) -> tuple[int, int] | None:
    """Corpus token totals from a gold file's comment line, if present."""
    with open(path, encoding="utf-8") as f:
        first = f.readline()
    m = re.match(r"# tokens_c1=(\d+) tokens_c2=(\d+)", first)
    return (int(m.group(1)), int(m.group(2))) if m else None


def read_gold(path) -> list[dict]:
    """Read a gold or testset file into dicts with typed values."""
    rows = []
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        while header.startswith("#"):
            header = f.readline()
        header = header.rstrip("\n").split("\t")
        if tuple(header) != GOLD_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for line in f:
            values = dict(zip(header, line.rstrip("\n").split("\t")))
            rows.append({
                "lemma": LemmaKey(values["lemma"], values["pos"]),
                "graded": None if values["graded"] == "NA" else float(values["graded"]),
                "binary": None if values["binary"] == "NA" else int(values["binary"]),
                "freq_c1": int(values["freq_c1"]),
                "freq_c2": int(values["freq_c2"]),
                "re": float(values["re"]),
                "is_target": values["is_target"] == "1",
                "in_testset": values["in_testset"] == "1",
                "senses": tuple(values["senses"].split(",")),
                "t1": tuple(int(c) for c in values["t1"].split(",")),
                "t2": tuple(int(c) for c in values["t2"].split(",")),
            })
    return rows


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def export(
    corpus: AnnotatedCorpus,
    split: Split,
    records: list[GoldRecord],
    out_dir,
    config: SplitConfig | None = None,
) -> dict[str, Path]:
    """Write both corpora, gold and testset files and the assignment log to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    paths = {
        "corpus1": out / "corpus1.txt",
        "corpus2": out / "corpus2.txt",
        "gold": out / "gold.tsv",
        "testset": out / "testset.tsv",
        "log": out / "split.log.tsv",
    }
    lines = (_plain_lines(corpus, split.c1), _plain_lines(corpus, split.c2))
    counts = tuple(sum(len(line.split()) for line in side) for side in lines)
    _write(paths["corpus1"], "".join(line + "\n" for line in lines[0]))
    _write(paths["corpus2"], "".join(line + "\n" for line in lines[1]))
    _write(paths["gold"], format_gold(records, counts))
    _write(paths["testset"], format_gold([r for r in records if r.in_testset], counts))

    cfg = config or SplitConfig()
    head = [
        f"# rng={RNG_ALGORITHM} seed={cfg.seed} target_min={cfg.target_freq_min} "
        f"target_max={cfg.target_freq_max} k={cfg.binary_k} re_max={cfg.re_max} "
        f"min_freq={cfg.testset_freq_min}\n"
    ]
    head += [f"# conflict\t{sid}\t{key}\n" for sid, key in split.conflicts]
    rows = [f"{a.sentence_id}\t{a.side}\t{a.rule}\n" for a in split.log]
    _write(paths["log"], "".join(head + rows))
    return paths
