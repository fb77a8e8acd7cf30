"""Command-line pipeline: simulate a split, run the model grid, evaluate predictions.

Stages communicate only through files in the output directory::

    corpus1.txt corpus2.txt gold.tsv testset.tsv split.log.tsv   (simulate)
    predictions/<cell>.tsv + .json                               (models)
    report.tsv summary.tsv report.iterations.tsv report.json     (evaluate)

Settings come from an optional key = value file (``--config``); command-line
flags override it. Exit status is 0 on success, 1 on an internal error and
2 on a usage or input error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .corpus import CorpusParseError, read_corpus, write_corpus
from .embeddings.grid import ModelGridSpec, plan_jobs, run_grid
from .evaluation import aggregate, baseline_rows, evaluate_cell, load_predictions, write_report
from .simulator import SplitConfig, read_gold, read_token_counts, simulate
from .synthetic import SyntheticConfig, generate_corpus

__all__ = ["main", "build_parser", "load_config", "InputError"]

log = logging.getLogger("lscsim")


class InputError(Exception):
    """A usage or input problem; reported with exit status 2."""


# key -> (type, default). Lists are comma-separated.
_INT, _FLOAT, _STR, _LIST, _INTLIST = int, float, str, "list", "intlist"
SETTINGS = {
    "input": (_STR, None),
    "out": (_STR, "lscsim-out"),
    "seed": (_INT, 0),
    "jobs": (_INT, 1),
    "target_min": (_INT, 100),
    "target_max": (_INT, 1000),
    "k": (_FLOAT, 0.1),
    "re_max": (_FLOAT, 0.5),
    "min_freq": (_INT, 50),
    "models": (_LIST, ("COUNT", "PPMI", "SVD", "SGNS")),
    "alignments": (_LIST, ("CI", "OP", "WI")),
    "measures": (_LIST, ("CD", "LND")),
    "dims": (_INTLIST, (30, 100)),
    "iterations": (_INT, 5),
    "window": (_INT, 10),
    "epochs": (_INT, 30),
    "negatives": (_INT, 5),
    "k_nn": (_INT, 25),
    "trials": (_INT, 1000),
}


def _convert(key: str, raw: str):
    kind = SETTINGS[key][0]
    try:
        if kind == _LIST:
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        if kind == _INTLIST:
            return tuple(int(x) for x in raw.split(",") if x.strip())
        return kind(raw)
    except ValueError as exc:
        raise InputError(f"invalid value for {key}: {raw!r}") from exc


def load_config(path) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",))
    try:
        parser.read_string("[lscsim]\n" + path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise InputError(f"{path}: {exc}") from exc
    values = {}
    for key, raw in parser["lscsim"].items():
        key = key.replace("-", "_")
        if key not in SETTINGS:
            raise InputError(f"{path}: unknown setting {key!r}")
        values[key] = _convert(key, raw)
    return values


@dataclass(frozen=True)
class PipelineConfig:
    input: Path | None
    out: Path
    seed: int
    jobs: int
    split: SplitConfig
    grid: ModelGridSpec
    trials: int

    @property
    def predictions(self) -> Path:
        return self.out / "predictions"


def resolve(args: argparse.Namespace) -> PipelineConfig:
    values = {k: default for k, (_, default) in SETTINGS.items()}
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    for key in SETTINGS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag) if isinstance(flag, str) and SETTINGS[key][0] in (_LIST, _INTLIST) else flag
    try:
        split = SplitConfig(
            seed=values["seed"], target_freq_min=values["target_min"], target_freq_max=values["target_max"],
            binary_k=values["k"], re_max=values["re_max"], testset_freq_min=values["min_freq"],
        )
        grid = ModelGridSpec(
            models=values["models"], alignments=values["alignments"], measures=values["measures"],
            dims=values["dims"], iterations=values["iterations"], window=values["window"],
            epochs=values["epochs"], negatives=values["negatives"], k_nn=values["k_nn"],
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if values["jobs"] < 1:
        raise InputError("--jobs must be at least 1")
    if values["trials"] < 1:
        raise InputError("--trials must be at least 1")
    return PipelineConfig(
        input=Path(values["input"]) if values["input"] else None,
        out=Path(values["out"]),
        seed=values["seed"],
        jobs=values["jobs"],
        split=split,
        grid=grid,
        trials=values["trials"],
    )


def _require(*paths: Path) -> None:
    for p in paths:
        if not p.exists():
            raise InputError(f"required input not found: {p}")


def cmd_simulate(cfg: PipelineConfig) -> int:
    if cfg.input is None:
        raise InputError("no input corpus given (use --input or 'input =' in the config)")
    _require(cfg.input)
    try:
        corpus = read_corpus(cfg.input)
    except CorpusParseError as exc:
        raise InputError(f"{cfg.input}: {exc}") from exc
    sim = simulate(corpus, cfg.split)
    sim.export(corpus, cfg.out)
    print(f"wrote split of {len(corpus)} sentences to {cfg.out} "
          f"({len(sim.plans)} targets, {len(sim.testset)} testset lemmas)")
    return 0


def cmd_models(cfg: PipelineConfig) -> int:
    if not plan_jobs(cfg.grid, cfg.seed):
        log.warning("the model grid is empty; nothing to do")
        return 0
    c1, c2, testset = cfg.out / "corpus1.txt", cfg.out / "corpus2.txt", cfg.out / "testset.tsv"
    _require(c1, c2, testset)
    targets = [r["lemma"] for r in read_gold(testset)]
    if not targets:
        raise InputError(f"{testset} lists no lemmas")
    written = run_grid(cfg.grid, c1, c2, targets, cfg.predictions, seed=cfg.seed, jobs=cfg.jobs)
    print(f"wrote {len(written)} prediction files to {cfg.predictions}")
    return 0


def cmd_evaluate(cfg: PipelineConfig, baselines_only: bool = False) -> int:
    testset_path = cfg.out / "testset.tsv"
    _require(testset_path)
    testset = read_gold(testset_path)
    if not testset:
        raise InputError(f"{testset_path} is empty")
    counts = read_token_counts(testset_path)
    if counts is None:
        raise InputError(f"{testset_path} lacks the corpus token totals line")
    graded = {r["lemma"]: r["graded"] for r in testset}
    binary = {r["lemma"]: r["binary"] for r in testset}

    predictions = []
    if not baselines_only:
        if cfg.predictions.is_dir():
            predictions = load_predictions(cfg.predictions)
        if not predictions:
            raise InputError(f"no prediction files in {cfg.predictions} (use --baselines-only to score baselines alone)")
    scores = [evaluate_cell(p, graded, binary) for p in predictions]
    rows, rand = baseline_rows(testset, counts, trials=cfg.trials, seed=cfg.seed)
    report = aggregate(scores, rows)
    report.random = rand
    paths = write_report(report, cfg.out)
    meta = {
        "seed": cfg.seed,
        "trials": cfg.trials,
        "testset_lemmas": len(testset),
        "binary_positives": sum(1 for r in testset if r["binary"]),
        "prediction_files": [p.provenance for p in predictions],
        "version": __version__,
    }
    with open(cfg.out / "report.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    print(paths["summary"].read_text(encoding="utf-8"), end="")
    return 0


def cmd_synthesize(path: Path, seed: int) -> int:
    corpus = generate_corpus(SyntheticConfig(seed=seed))
    path.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(corpus, path)
    print(f"wrote {len(corpus)} sentences to {path}")
    return 0


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=default, help="key = value settings file")
    p.add_argument("--out", default=default, help="output directory (default lscsim-out)")
    p.add_argument("--seed", type=int, default=default, help="master seed (default 0)")
    p.add_argument("--jobs", type=int, default=default, help="worker processes for the model grid")
    p.add_argument("-v", "--verbose", action="store_true", default=default)


def _add_split(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="annotated corpus in the canonical format")
    p.add_argument("--target-min", dest="target_min", type=int)
    p.add_argument("--target-max", dest="target_max", type=int)
    p.add_argument("--k", type=float, help="binary change threshold")
    p.add_argument("--re-max", dest="re_max", type=float)
    p.add_argument("--min-freq", dest="min_freq", type=int)


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--models", help="comma-separated subset of COUNT,PPMI,SVD,SGNS")
    p.add_argument("--alignments", help="comma-separated subset of CI,OP,WI")
    p.add_argument("--measures", help="comma-separated subset of CD,LND")
    p.add_argument("--dims", help="comma-separated dimensionalities for SVD and SGNS")
    p.add_argument("--iterations", type=int, help="runs per cell for SGNS")
    p.add_argument("--epochs", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--negatives", type=int)
    p.add_argument("--k-nn", dest="k_nn", type=int)


def _add_eval(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, help="random rankings for the RAND baseline")
    p.add_argument("--baselines-only", action="store_true", help="score only POLY, FREQ and RAND")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lscsim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="split an annotated corpus and write gold scores")
    _add_common(p, suppress=True)
    _add_split(p)
    p = sub.add_parser("models", help="train the model grid and write predictions")
    _add_common(p, suppress=True)
    _add_grid(p)
    p = sub.add_parser("evaluate", help="score predictions and baselines against the testset")
    _add_common(p, suppress=True)
    _add_eval(p)
    p = sub.add_parser("all", help="simulate, models and evaluate in sequence")
    _add_common(p, suppress=True)
    _add_split(p)
    _add_grid(p)
    _add_eval(p)
    p = sub.add_parser("synthesize", help="write a synthetic SemCor-scale annotated corpus")
    _add_common(p, suppress=True)
    p.add_argument("path", type=Path, help="destination file")
    return parser


def run(args: argparse.Namespace) -> int:
    if args.command == "synthesize":
        return cmd_synthesize(args.path, args.seed or 0)
    cfg = resolve(args)
    if args.command == "simulate":
        return cmd_simulate(cfg)
    if args.command == "models":
        return cmd_models(cfg)
    if args.command == "evaluate":
        return cmd_evaluate(cfg, args.baselines_only)
    status = cmd_simulate(cfg)
    if status == 0:
        status = cmd_models(cfg)
    if status == 0:
        status = cmd_evaluate(cfg, args.baselines_only)
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return run(args)
    except InputError as exc:
        print(f"lscsim: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, CorpusParseError) as exc:
        print(f"lscsim: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        log.exception("internal error")
        print(f"lscsim: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
