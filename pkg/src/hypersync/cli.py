"""Command-line entry point.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage or config
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import presets
from .admissible import (
    ResponseFunction,
    assemble,
    random_polynomial_response,
    synchrony_census,
    type_signatures,
)
from .augment import AugmentationError, AugmentationSpec, augment
from .bifurcation import SweepConfig, SweepError, sweep_branch
from .dynamics import BlowUpError, EigenvalueError, IntegratorConfig
from .experiments import _branch_svg, run_example, run_tower
from .network import Hypernetwork, NetworkError, load_network, validate
from .symgroup import check_factorization, enumerate_sym

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _reject_unknown(doc: dict, allowed: set[str], where: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def resolve_network(source: str) -> Hypernetwork:
    """A preset name, or a path to a network document."""
    if source in presets.NETWORKS:
        return presets.network(source)
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"{source!r} is neither a network preset ({', '.join(sorted(presets.NETWORKS))}) "
                          f"nor an existing file")
    return load_network(path)


@dataclass(frozen=True)
class ExperimentConfig:
    network: str
    responses: dict
    sweep: SweepConfig
    out_dir: str | None = None
    seed: int = 0

    _SWEEP_KEYS = {"lam_min", "lam_max", "count", "spacing", "initial", "step", "horizon", "method", "warm_start"}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        _reject_unknown(doc, {"network", "responses", "sweep", "out_dir", "seed"}, "config")
        for key in ("network", "responses", "sweep"):
            if key not in doc:
                raise ConfigError(f"config: missing {key!r}")
        s = doc["sweep"]
        _reject_unknown(s, cls._SWEEP_KEYS, "sweep")
        try:
            integ = IntegratorConfig(float(s.get("step", 0.1)), float(s.get("horizon", 5000.0)),
                                     s.get("method", "euler"))
            sweep = SweepConfig(float(s["lam_min"]), float(s["lam_max"]), int(s["count"]),
                                tuple(float(v) for v in s["initial"]), s.get("spacing", "uniform"),
                                integ, bool(s.get("warm_start", False)))
        except KeyError as exc:
            raise ConfigError(f"sweep: missing {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sweep: {exc}") from None
        if not isinstance(doc["responses"], dict):
            raise ConfigError("responses: expected an object mapping node types to presets")
        return cls(str(doc["network"]), dict(doc["responses"]), sweep, doc.get("out_dir"), int(doc.get("seed", 0)))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(doc)


def build_response(spec, hn: Hypernetwork, node_type: str, rng) -> ResponseFunction:
    """A response from a preset name or an inline spec.

    Inline specs: ``{"polynomial": {"degree": d}}`` (random symmetrized
    polynomial drawn from the config seed), ``{"linear_G": [A, B, C]}`` or
    ``{"linear_F": [a, b, c, d]}``.
    """
    sigs = type_signatures(hn)
    if node_type not in sigs:
        raise ConfigError(f"responses: network has no node type {node_type!r}")
    sig = sigs[node_type]
    if isinstance(spec, str):
        try:
            return presets.response(spec, hn, node_type)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    _reject_unknown(spec, {"polynomial", "linear_G", "linear_F"}, f"responses.{node_type}")
    if len(spec) != 1:
        raise ConfigError(f"responses.{node_type}: give exactly one inline spec")
    (kind, arg), = spec.items()
    try:
        if kind == "polynomial":
            _reject_unknown(arg, {"degree"}, f"responses.{node_type}.polynomial")
            return random_polynomial_response(node_type, sig, int(arg["degree"]), rng)
        if kind == "linear_G":
            return presets.linear_G(*map(float, arg))(node_type, sig)
        return presets.linear_F(*map(float, arg))(node_type, sig)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"responses.{node_type}: {exc}") from None


def _out_dir(args, fallback: str | None = None) -> Path | None:
    d = args.out_dir or fallback
    return Path(d) if d else None


def cmd_run_example(args) -> int:
    res = run_example(args.n, _out_dir(args), svg=args.format == "csv+svg")
    print(res.summary())
    return EXIT_OK if res.passed else EXIT_VERDICT


def cmd_run_tower(args) -> int:
    if not 1 <= args.layers <= 3:
        print("error: layers must be 1, 2 or 3", file=sys.stderr)
        return EXIT_USAGE
    res = run_tower(args.layers, _out_dir(args), svg=args.format == "csv+svg")
    print(res.summary())
    return EXIT_OK if res.passed else EXIT_VERDICT


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    hn = resolve_network(cfg.network)
    seed = args.seed if args.seed is not None else cfg.seed
    rng = np.random.default_rng(seed)
    responses = {t: build_response(spec, hn, t, rng) for t, spec in sorted(cfg.responses.items())}
    missing = set(type_signatures(hn)) - set(responses)
    if missing:
        raise ConfigError(f"responses: no response for node types {sorted(missing)}")
    if len(cfg.sweep.initial) != hn.n:
        raise ConfigError(f"sweep: initial state has {len(cfg.sweep.initial)} entries, network has {hn.n} nodes")
    field = assemble(hn, responses)
    branch = sweep_branch(field, cfg.sweep, tuple(hn.node_ids))
    out = _out_dir(args, cfg.out_dir)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        branch.to_csv(out / "branch.csv")
        if args.format == "csv+svg":
            _branch_svg(out / "branch.svg", branch, "steady states")
    print(f"{int(branch.converged.sum())} of {len(branch)} points converged; "
          f"{int(branch.stable.sum())} stable")
    return EXIT_OK


def cmd_check_synchrony(args) -> int:
    hn = resolve_network(args.network)
    report = validate(hn)
    if not report.ok:
        raise ConfigError(f"network does not validate: {report.violations}")
    census = synchrony_census(hn, samples=args.samples, seed=args.seed or 0, points=args.points)
    rows = []
    for v in census:
        verdict = "robust" if v.robust else "not robust"
        print(f"{str(v.partition):40s} {verdict:10s} max violation {v.max_violation:.3e}")
        rows.append((str(v.partition), int(v.robust), repr(v.max_violation)))
    robust = [v for v in census if v.robust and v.partition.nontrivial]
    print(f"{len(robust)} nontrivial robust partition(s)")
    out = _out_dir(args)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "synchrony.csv", "w") as fh:
            fh.write("partition,robust,max_violation\n")
            for r in rows:
                fh.write(f"\"{r[0]}\",{r[1]},{r[2]}\n")
    return EXIT_OK


def cmd_verify_factorization(args) -> int:
    if not 2 <= args.k <= 4:
        print("error: k must lie in 2..4", file=sys.stderr)
        return EXIT_USAGE
    if args.points < 1:
        print("error: points must be positive", file=sys.stderr)
        return EXIT_USAGE
    table = enumerate_sym(args.k + 1)
    rng = np.random.default_rng(args.seed or 0)
    worst, failures = 0.0, 0
    for x in rng.uniform(-1.0, 1.0, (args.points, args.k + 1)):
        diff, prod, ok = check_factorization(table, x)
        worst = max(worst, abs(diff - prod) / (1.0 + abs(prod)))
        failures += not ok
    status = "pass" if failures == 0 else "FAIL"
    print(f"k = {args.k}: {args.points} points, max relative discrepancy {worst:.3e}, {status}")
    return EXIT_OK if failures == 0 else EXIT_VERDICT


def cmd_augment(args) -> int:
    core = load_network(args.core)
    chosen = tuple(args.chosen) if args.chosen else None
    if chosen is not None and all(isinstance(v, int) for v in core.node_ids):
        chosen = tuple(int(v) for v in chosen)
    aug = augment(AugmentationSpec(core, chosen))
    text = aug.to_json()
    out = _out_dir(args)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / (Path(args.core).stem + "_augmented.json")).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed for sampled checks")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="directory for CSV/SVG artifacts")
    common.add_argument("--format", choices=("csv", "csv+svg"), default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="hypersync", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-example", parents=[common], help="run a worked example with its fixed protocol")
    p.add_argument("n", type=int, choices=sorted(presets.EXAMPLES))
    p.set_defaults(func=cmd_run_example)

    p = sub.add_parser("run-tower", parents=[common], help="stacked augmentation tower on the Example-1 core")
    p.add_argument("layers", type=int)
    p.set_defaults(func=cmd_run_tower)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check-synchrony", parents=[common], help="robust synchrony census")
    p.add_argument("network", help="preset name or network document path")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--points", type=int, default=16)
    p.set_defaults(func=cmd_check_synchrony)

    p = sub.add_parser("verify-factorization", parents=[common], help="even/odd difference vs Vandermonde product")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--points", type=int, default=1000)
    p.set_defaults(func=cmd_verify_factorization)

    p = sub.add_parser("augment", parents=[common], help="augment a core network document")
    p.add_argument("core")
    p.add_argument("--chosen", nargs="+", help="core node ids to augment on (default: all)")
    p.set_defaults(func=cmd_augment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("out_dir", None), ("format", "csv+svg"), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, NetworkError, AugmentationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SweepError, BlowUpError, EigenvalueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
