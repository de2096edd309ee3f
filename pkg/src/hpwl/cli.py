"""Command-line interface: ``hpwl select|sweep|ablate|trace``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .dataset import DataMatrix, load_csv, standardize
from .evaluation import DEFAULT_FEATURE_COUNTS, grid_search, run_sweep
from .exceptions import ConfigError, HpwlError, LoadError
from .solver import VARIANTS, HpwlParams, run
from .svg import write_line_chart

logger = logging.getLogger("hpwl")

LOG_ENV = "HPWL_LOG_LEVEL"
ABLATIONS = ("identity_d", "binary_h", "no_global")

PARAM_FLAGS = {
    "tau": float,
    "rho": float,
    "kappa": float,
    "rank_r": int,
    "embed_k": int,
    "l": int,
    "m": int,
    "outer_max": int,
    "inner_pq_max": int,
    "tol": float,
    "weight_update": str,
}


@dataclass
class RunConfig:
    input: Path
    label_column: Optional[str] = None
    has_header: bool = False
    standardize: bool = True
    params: HpwlParams = field(default_factory=HpwlParams)
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    variant: str = "full"
    variants: list = field(default_factory=lambda: list(ABLATIONS))
    output_dir: Path = Path(".")
    emit_svg: bool = False
    feature_counts: list = field(default_factory=lambda: list(DEFAULT_FEATURE_COUNTS))
    k_neighbors: int = 5
    grid: dict = field(default_factory=dict)


class Outputs:
    """Tracks written files so a failed command leaves nothing behind."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self.directory / name
        self.written.append(p)
        return p

    def discard(self):
        for p in self.written:
            p.unlink(missing_ok=True)


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# -- config -------------------------------------------------------------------


def _parse_grid(items) -> dict:
    grid = {}
    for item in items or []:
        name, _, values = item.partition("=")
        name = name.strip()
        if name not in PARAM_FLAGS or not values:
            raise ConfigError(f"bad --grid entry {item!r}; expected NAME=v1,v2,...")
        grid[name] = [PARAM_FLAGS[name](v) for v in values.split(",")]
    return grid


def build_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config:
        cfg_path = Path(args.config)
        if not cfg_path.is_file():
            raise ConfigError(f"config file not found: {cfg_path}")
        try:
            raw = json.loads(cfg_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{cfg_path}: invalid JSON ({exc.msg})") from None

    param_raw = dict(raw.pop("params", {}))
    for name in PARAM_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            param_raw[name] = value
    known = {f.name for f in fields(HpwlParams)}
    unknown = set(param_raw) - known
    if unknown:
        raise ConfigError(f"unknown parameters: {sorted(unknown)}")
    try:
        params = HpwlParams(**param_raw).validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None

    overrides = {
        "input": args.input,
        "label_column": args.label_column,
        "has_header": args.header,
        "standardize": args.standardize,
        "seeds": args.seeds,
        "variant": getattr(args, "variant", None),
        "variants": getattr(args, "variants", None),
        "output_dir": args.out,
        "emit_svg": args.svg,
        "feature_counts": getattr(args, "feature_counts", None),
        "k_neighbors": getattr(args, "k_neighbors", None),
    }
    merged = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    grid = _parse_grid(getattr(args, "grid", None)) or merged.get("grid", {})
    merged["grid"] = grid
    unknown = set(merged) - {f.name for f in fields(RunConfig)}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "input" not in merged:
        raise ConfigError("no input file given")
    merged["input"] = Path(merged["input"])
    merged["output_dir"] = Path(merged.get("output_dir", "."))
    if not merged["input"].is_file():
        raise LoadError(f"input file not found: {merged['input']}")
    config = RunConfig(params=params, **merged)
    for v in [config.variant, *config.variants]:
        if v not in VARIANTS:
            raise ConfigError(f"unknown variant {v!r}; choose from {list(VARIANTS)}")
    return config


def _load(config: RunConfig, need_labels: bool) -> DataMatrix:
    data = load_csv(config.input, config.has_header, config.label_column)
    if need_labels and data.labels is None:
        raise ConfigError("this command needs a labelled dataset (use --label-column)")
    return data


# -- commands -----------------------------------------------------------------


def _write_trace(out: Outputs, state):
    rows = [
        (i + 1, _fmt(o), _fmt(e))
        for i, (o, e) in enumerate(zip(state.objective_trace, state.err_trace))
    ]
    _write_csv(out.path("trace.csv"), ["iteration", "objective", "err"], rows)


def cmd_select(config: RunConfig, out: Outputs) -> dict:
    data = _load(config, need_labels=False)
    values = standardize(data).values if config.standardize else data.values
    state = run(values, config.params, seed=config.seeds[0], variant=config.variant)
    ranking = state.ranking()
    names = data.names()
    rows = [
        (rank + 1, int(j), names[j], _fmt(ranking.scores[j]))
        for rank, j in enumerate(ranking.order)
    ]
    _write_csv(out.path("ranking.csv"), ["rank", "feature_index", "feature_name", "score"], rows)
    _write_trace(out, state)
    return {"centroid_indices": state.centroid_indices.tolist(), "iterations": state.iteration}


def cmd_trace(config: RunConfig, out: Outputs) -> dict:
    data = _load(config, need_labels=False)
    values = standardize(data).values if config.standardize else data.values
    state = run(values, config.params, seed=config.seeds[0], variant=config.variant)
    _write_trace(out, state)
    if config.emit_svg:
        its = list(range(1, len(state.err_trace) + 1))
        write_line_chart(
            out.path("convergence.svg"),
            [("objective", its, state.objective_trace)],
            title="Objective per outer iteration", x_label="iteration", y_label="objective",
        )
        write_line_chart(
            out.path("err.svg"),
            [("err", its, state.err_trace)],
            title="Normalised change of T", x_label="iteration", y_label="err",
        )
    return {"iterations": state.iteration, "converged": state.converged}


def _sweep_params(config: RunConfig, data: DataMatrix, kwargs: dict) -> tuple[HpwlParams, list]:
    if not config.grid:
        return config.params, []
    best, scored = grid_search(data, config.grid, base=config.params, **kwargs)
    report = [
        {**{k: getattr(p, k) for k in sorted(config.grid)}, "mean_accuracy": acc}
        for p, acc in scored
    ]
    return best, report


def _run_variants(config: RunConfig, out: Outputs, variants: list) -> dict:
    data = _load(config, need_labels=True)
    kwargs = dict(
        seeds=config.seeds,
        feature_counts=config.feature_counts,
        k_neighbors=config.k_neighbors,
        standardize=config.standardize,
    )
    params, grid_report = _sweep_params(config, data, kwargs)
    results = [run_sweep(data, params, variant=v, **kwargs) for v in variants]

    rows = [(v, s, c, _fmt(a)) for r in results for v, s, c, a in r.rows()]
    _write_csv(out.path("sweep.csv"), ["variant", "seed", "feature_count", "accuracy"], rows)
    summary = {
        "input": str(config.input),
        "params": asdict(params),
        "k_neighbors": config.k_neighbors,
        "variants": [r.summary() for r in results],
    }
    if len(results) == 1:
        summary.update(results[0].summary())
    if grid_report:
        summary["grid"] = grid_report
    out.path("summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    if config.emit_svg:
        write_line_chart(
            out.path("accuracy_vs_features.svg"),
            [(r.variant, r.feature_counts.tolist(), r.mean.tolist()) for r in results],
            title="KNN accuracy vs. number of selected features",
            x_label="number of features", y_label="mean accuracy", y_range=(0.0, 1.0),
        )
    return summary


def cmd_sweep(config: RunConfig, out: Outputs) -> dict:
    return _run_variants(config, out, [config.variant])


def cmd_ablate(config: RunConfig, out: Outputs) -> dict:
    variants = ["full", *[v for v in config.variants if v != "full"]]
    return _run_variants(config, out, variants)


COMMANDS = {"select": cmd_select, "sweep": cmd_sweep, "ablate": cmd_ablate, "trace": cmd_trace}


# -- argument parsing ---------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hpwl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="CSV data file")
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--label-column", help="label column name or zero-based index")
    common.add_argument("--header", action="store_true", default=None,
                        help="first row holds column names")
    common.add_argument("--no-standardize", dest="standardize", action="store_false",
                        default=None, help="use raw feature values")
    common.add_argument("--seeds", type=_int_list, help="comma-separated seeds")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--svg", action="store_true", default=None, help="also write SVG charts")
    g = common.add_argument_group("solver parameters")
    g.add_argument("--tau", type=float)
    g.add_argument("--rho", type=float)
    g.add_argument("--kappa", type=float)
    g.add_argument("--rank", dest="rank_r", type=int)
    g.add_argument("--embed-k", dest="embed_k", type=int)
    g.add_argument("--neighbors", dest="l", type=int)
    g.add_argument("--centroids", dest="m", type=int)
    g.add_argument("--outer-max", dest="outer_max", type=int)
    g.add_argument("--inner-max", dest="inner_pq_max", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--weight-update", dest="weight_update", choices=["safeguarded", "literal"])

    variant_opt = argparse.ArgumentParser(add_help=False)
    variant_opt.add_argument("--variant", choices=VARIANTS)

    sweep_opts = argparse.ArgumentParser(add_help=False)
    sweep_opts.add_argument("--feature-counts", type=_int_list)
    sweep_opts.add_argument("--k-neighbors", type=int)
    sweep_opts.add_argument("--grid", action="append", metavar="NAME=V1,V2",
                            help="grid-search a parameter (repeatable)")

    sub.add_parser("select", parents=[common, variant_opt], help="rank features of a CSV")
    sub.add_parser("trace", parents=[common, variant_opt], help="write the convergence series")
    sub.add_parser("sweep", parents=[common, variant_opt, sweep_opts],
                   help="50/50 KNN evaluation over feature counts")
    ablate = sub.add_parser("ablate", parents=[common, sweep_opts],
                            help="sweep the full method and its ablations")
    ablate.add_argument("--variants", type=lambda s: s.split(","),
                        help=f"comma-separated subset of {','.join(ABLATIONS)}")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = make_parser().parse_args(argv)
    try:
        config = build_config(args)
    except (ConfigError, LoadError) as exc:
        print(f"hpwl {args.command}: {exc}", file=sys.stderr)
        return 2

    out = Outputs(config.output_dir)
    try:
        COMMANDS[args.command](config, out)
    except (ConfigError, LoadError) as exc:
        out.discard()
        print(f"hpwl {args.command}: {exc}", file=sys.stderr)
        return 2
    except (HpwlError, ValueError, OSError) as exc:
        out.discard()
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"hpwl {args.command}: {msg}", file=sys.stderr)
        return 1
    for p in out.written:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
