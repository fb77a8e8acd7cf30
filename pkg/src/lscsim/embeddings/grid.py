"""Model grid: train spaces for every (model, alignment, dim, iteration) job and write predictions."""

from __future__ import annotations

import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from ..corpus import LemmaKey
from .alignment import align_ci, align_op, word_injection
from .measures import DEFAULT_KNN, cosine_distance, lnd
from .sgns import SGNSConfig, train_sgns
from .spaces import EmbeddingSpace, as_space, build_count_matrix, ppmi, read_sentences, svd_reduce

__all__ = [
    "MODELS",
    "ALIGNMENTS",
    "MEASURES",
    "RANDOM_MODELS",
    "ModelGridSpec",
    "Job",
    "plan_jobs",
    "run_job",
    "run_grid",
    "predict",
    "write_predictions",
    "read_predictions",
    "cell_id",
]

log = logging.getLogger(__name__)

MODELS = ("COUNT", "PPMI", "SVD", "SGNS")
ALIGNMENTS = ("CI", "OP", "WI")
MEASURES = ("CD", "LND")
RANDOM_MODELS = frozenset({"SGNS"})
SPARSE_MODELS = frozenset({"COUNT", "PPMI"})
# CI needs shared column semantics (sparse models); OP needs dense spaces.
VALID = {
    "COUNT": ("CI", "WI"),
    "PPMI": ("CI", "WI"),
    "SVD": ("OP", "WI"),
    "SGNS": ("OP", "WI"),
}


@dataclass(frozen=True)
class ModelGridSpec:
    models: tuple[str, ...] = MODELS
    alignments: tuple[str, ...] = ALIGNMENTS
    measures: tuple[str, ...] = MEASURES
    dims: tuple[int, ...] = (30, 100)
    iterations: int = 5
    window: int = 10
    epochs: int = 30
    negatives: int = 5
    k_nn: int = DEFAULT_KNN

    def __post_init__(self):
        for name, chosen, allowed in (
            ("model", self.models, MODELS),
            ("alignment", self.alignments, ALIGNMENTS),
            ("measure", self.measures, MEASURES),
        ):
            unknown = set(chosen) - set(allowed)
            if unknown:
                raise ValueError(f"unknown {name}(s): {sorted(unknown)}")
        if any(d < 1 for d in self.dims):
            raise ValueError("dimensions must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")

    @property
    def empty(self) -> bool:
        return not (self.models and self.alignments and self.measures) or not plan_jobs(self, 0)


@dataclass(frozen=True)
class Job:
    model: str
    alignment: str
    dim: int  # 0 for unreduced count-based spaces
    iteration: int
    seed: int

    @property
    def id(self) -> str:
        return f"{self.model}+{self.alignment}+d{self.dim}+i{self.iteration}"


def cell_id(model: str, alignment: str, measure: str, dim: int, iteration: int) -> str:
    return f"{model}+{alignment}+{measure}+d{dim}+i{iteration}"


def _job_seed(base_seed: int, job_key: str) -> int:
    ss = np.random.SeedSequence([base_seed, zlib.crc32(job_key.encode())])
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


def plan_jobs(spec: ModelGridSpec, seed: int) -> list[Job]:
    jobs = []
    for model in spec.models:
        dims = (0,) if model in SPARSE_MODELS else spec.dims
        iterations = spec.iterations if model in RANDOM_MODELS else 1
        for alignment in spec.alignments:
            if alignment not in VALID[model]:
                continue
            for dim in dims:
                for it in range(iterations):
                    key = f"{model}+{alignment}+d{dim}+i{it}"
                    jobs.append(Job(model, alignment, dim, it, _job_seed(seed, key)))
    return jobs


def _train_space(model: str, sentences, dim: int, spec: ModelGridSpec, seed: int) -> EmbeddingSpace:
    if model == "SGNS":
        cfg = SGNSConfig(dim=dim, window=spec.window, negatives=spec.negatives, epochs=spec.epochs)
        return train_sgns(sentences, cfg, seed)
    counts = build_count_matrix(sentences, spec.window)
    if model == "COUNT":
        return as_space(counts, "COUNT")
    weighted = ppmi(counts)
    if model == "PPMI":
        return as_space(weighted, "PPMI")
    return svd_reduce(weighted, dim)


def _score(measure: str, a, b, word_a, word_b, k_nn, exclude=frozenset()) -> float | None:
    try:
        if measure == "CD":
            return cosine_distance(a, b, word_a, word_b)
        return lnd(a, b, word_a, k_nn, word_b, exclude)
    except (KeyError, ValueError):
        return None


def predict(
    job: Job,
    spec: ModelGridSpec,
    c1: list[list[str]],
    c2: list[list[str]],
    targets: list[LemmaKey],
) -> dict[str, dict[LemmaKey, float | None]]:
    """Train the job's spaces and score every target under each requested measure."""
    words = sorted({t.lemma for t in targets})
    out: dict[str, dict[LemmaKey, float | None]] = {m: {} for m in spec.measures}
    if job.alignment == "WI":
        combined, renaming = word_injection(c1, c2, words)
        space = _train_space(job.model, combined, job.dim, spec, job.seed)
        injected_words = frozenset(w for pair in renaming.values() for w in pair)
        for measure in spec.measures:
            for key in targets:
                w1, w2 = renaming[key.lemma]
                out[measure][key] = _score(measure, space, space, w1, w2, spec.k_nn, injected_words)
        return out

    a = _train_space(job.model, c1, job.dim, spec, job.seed)
    b = _train_space(job.model, c2, job.dim, spec, job.seed + 1)
    if job.alignment == "CI":
        a, b = align_ci(a, b)
    else:
        b = align_op(a, b)
    for measure in spec.measures:
        for key in targets:
            out[measure][key] = _score(measure, a, b, key.lemma, key.lemma, spec.k_nn)
    return out


def write_predictions(path: Path, scores: dict[LemmaKey, float | None], provenance: dict) -> None:
    lines = []
    for key in sorted(scores):
        value = scores[key]
        lines.append(f"{key.lemma}\t{key.pos}\t{'NA' if value is None else repr(float(value))}\n")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(lines)
    with open(path.with_suffix(".json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(provenance, f, indent=2, sort_keys=True)
        f.write("\n")


def read_predictions(path) -> dict[LemmaKey, float | None]:
    scores: dict[LemmaKey, float | None] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            key = LemmaKey(parts[0], parts[1])
            if key in scores:
                raise ValueError(f"{path}:{lineno}: duplicate lemma {key}")
            scores[key] = None if parts[2] == "NA" else float(parts[2])
    return scores


def run_job(job: Job, spec: ModelGridSpec, corpus1, corpus2, targets, out_dir, base_seed: int) -> list[Path]:
    c1, c2 = read_sentences(corpus1), read_sentences(corpus2)
    predictions = predict(job, spec, c1, c2, targets)
    written = []
    for measure, scores in predictions.items():
        name = cell_id(job.model, job.alignment, measure, job.dim, job.iteration)
        provenance = {
            "cell": name,
            "model": job.model,
            "alignment": job.alignment,
            "measure": measure,
            "dim": job.dim,
            "iteration": job.iteration,
            "seed": job.seed,
            "base_seed": base_seed,
            "window": spec.window,
            "corpora": [Path(corpus1).name, Path(corpus2).name],
            "deterministic": True,
        }
        if job.model == "SGNS":
            provenance["sgns"] = asdict(SGNSConfig(dim=job.dim, window=spec.window, negatives=spec.negatives, epochs=spec.epochs))
            provenance["sgns"]["init"] = "uniform(-0.5/d, 0.5/d); context vectors zero"
            provenance["sgns"]["subsampling"] = "none"
        if job.model in ("PPMI", "SVD"):
            provenance["ppmi"] = "log base e, no smoothing"
        if job.model == "SVD":
            provenance["svd"] = "U_d * S_d of PPMI"
        if measure == "LND":
            provenance["k_nn"] = spec.k_nn
        if job.alignment == "OP":
            provenance["op"] = "rows length-normalized and mean-centered before solving"
        path = Path(out_dir) / f"{name}.tsv"
        write_predictions(path, scores, provenance)
        written.append(path)
    log.info("finished %s", job.id)
    return written


def run_grid(
    spec: ModelGridSpec,
    corpus1,
    corpus2,
    targets: Iterable[LemmaKey],
    out_dir,
    seed: int = 0,
    jobs: int = 1,
) -> list[Path]:
    """Run every grid job, optionally over a process pool; outputs do not depend on ``jobs``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    targets = sorted(set(targets))
    planned = plan_jobs(spec, seed)
    if jobs <= 1:
        results = [run_job(j, spec, corpus1, corpus2, targets, out, seed) for j in planned]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_job, j, spec, corpus1, corpus2, targets, out, seed) for j in planned]
            results = [f.result() for f in futures]
    return sorted(p for paths in results for p in paths)
