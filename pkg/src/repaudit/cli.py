"""Command-line interface: fit, analyze, poison, and synth subcommands.

Exit codes: 0 clean, 1 contamination found, 2 configuration error,
3 data or numeric error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as rio
from .contamination import PoisonPlan, poison_dataset
from .errors import AuditError, ConfigError, DataError
from .linalg import SymMatrix
from .pipeline import analyze, fit
from .scoring import report_to_json
from .synth import Infection, SynthSpec, generate

EXIT_CLEAN = 0
EXIT_FLAGGED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="PRNG seed (unsigned 64-bit)")
    parser.add_argument("--threshold", type=float, help="flagging threshold on J*")
    parser.add_argument("--dof-mode", choices=["dim", "custom"], dest="dof_mode")
    parser.add_argument("--dof-value", type=float, dest="dof_value")
    parser.add_argument(
        "--ridge", type=float, dest="ridge_scale", help="covariance ridge scale"
    )
    parser.add_argument("--em-max-iters", type=int, dest="em_max_iters")
    parser.add_argument("--em-tol", type=float, dest="em_tol")
    parser.add_argument(
        "--untangle-max-iters", type=int, dest="untangle_max_iters"
    )


def _config_from_args(args: argparse.Namespace) -> rio.RunConfig:
    keys = (
        "ridge_scale",
        "em_max_iters",
        "em_tol",
        "untangle_max_iters",
        "dof_mode",
        "dof_value",
        "threshold",
        "seed",
    )
    overrides = {k: getattr(args, k, None) for k in keys}
    return rio.make_config(getattr(args, "config", None), **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repaudit",
        description=(
            "Detect backdoor-contaminated classes in a classifier's "
            "representation space; also poison datasets and generate "
            "synthetic representations for testing."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the global decomposition on clean data")
    p_fit.add_argument("clean_path", help="clean lrm file")
    p_fit.add_argument("stats_out", help="output stats file")
    _add_config_flags(p_fit)

    p_an = sub.add_parser("analyze", help="scan a dataset for contaminated classes")
    p_an.add_argument("data_path", help="suspect lrm file")
    p_an.add_argument("stats_path", help="fitted stats file")
    p_an.add_argument("report_out", help="output report JSON")
    _add_config_flags(p_an)

    p_po = sub.add_parser("poison", help="append attack and cover rows to a dataset")
    p_po.add_argument("data_path", help="input lrm file")
    p_po.add_argument("trigger_path", help="trig file")
    p_po.add_argument("out_path", help="output lrm file (.prov sidecar added)")
    p_po.add_argument("--source", type=int, required=True, help="source class label")
    p_po.add_argument("--target", type=int, required=True, help="target class label")
    p_po.add_argument(
        "--cover-labels",
        dest="cover_labels",
        default="",
        help="comma-separated cover class labels",
    )
    p_po.add_argument("--attack", type=float, default=0.02, help="attack fraction of n")
    p_po.add_argument("--cover", type=float, default=0.01, help="cover fraction of n")
    p_po.add_argument("--seed", type=int, default=0)

    p_sy = sub.add_parser("synth", help="generate synthetic representations")
    p_sy.add_argument("out_path", help="output lrm file (.tags sidecar added)")
    p_sy.add_argument("--dim", type=int, default=16)
    p_sy.add_argument("--classes", type=int, default=43)
    p_sy.add_argument("--per-class", type=int, dest="per_class", default=100)
    p_sy.add_argument(
        "--mu-var", type=float, dest="mu_var", default=4.0,
        help="isotropic identity covariance scale",
    )
    p_sy.add_argument(
        "--eps-var", type=float, dest="eps_var", default=1.0,
        help="isotropic variation covariance scale",
    )
    p_sy.add_argument(
        "--infect",
        action="append",
        default=[],
        help="label:fraction:separation, repeatable",
    )
    p_sy.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_fit(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    clean = rio.read_lrm(args.clean_path)
    stats = fit(clean, config)
    rio.write_stats(args.stats_out, stats)
    print(
        f"fitted d={stats.d} classes={np.unique(clean.labels).size} "
        f"iters={stats.em_iters_used} converged={str(stats.converged).lower()}"
    )
    return EXIT_CLEAN


def _cmd_analyze(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    data = rio.read_lrm(args.data_path)
    stats = rio.read_stats(args.stats_path)
    report = analyze(data, stats, config)
    with open(args.report_out, "w", encoding="utf-8") as fh:
        fh.write(report_to_json(report))
    flagged = report.flagged_labels()
    for label in flagged:
        print(label)
    return EXIT_FLAGGED if flagged else EXIT_CLEAN


def _parse_cover_labels(text: str) -> tuple[int, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise ConfigError(f"bad --cover-labels value {text!r}") from None


def _cmd_poison(args: argparse.Namespace) -> int:
    data = rio.read_lrm(args.data_path)
    trig = rio.read_trigger(args.trigger_path)
    plan = PoisonPlan(
        source_label=args.source,
        target_label=args.target,
        cover_labels=_parse_cover_labels(args.cover_labels),
        attack_fraction=args.attack,
        cover_fraction=args.cover,
        seed=args.seed,
    )
    poisoned, tags = poison_dataset(data, trig, plan)
    rio.write_lrm(args.out_path, poisoned)
    rio.write_tags(args.out_path + ".prov", tags)
    print(f"appended {poisoned.n - data.n} rows ({poisoned.n} total)")
    return EXIT_CLEAN


def _parse_infections(entries: list[str]) -> tuple[Infection, ...]:
    out = []
    for text in entries:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"bad --infect value {text!r}, expected label:fraction:separation"
            )
        try:
            out.append(
                Infection(
                    class_label=int(parts[0]),
                    mix_fraction=float(parts[1]),
                    separation=float(parts[2]),
                )
            )
        except ValueError:
            raise ConfigError(f"bad --infect value {text!r}") from None
    return tuple(out)


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.mu_var <= 0 or args.eps_var <= 0:
        raise ConfigError("--mu-var and --eps-var must be positive")
    d = args.dim
    spec = SynthSpec(
        d=d,
        num_classes=args.classes,
        samples_per_class=args.per_class,
        s_mu_true=SymMatrix(args.mu_var * np.eye(d)),
        s_eps_true=SymMatrix(args.eps_var * np.eye(d)),
        infections=_parse_infections(args.infect),
        seed=args.seed,
    )
    data, tags = generate(spec)
    rio.write_lrm(args.out_path, data)
    rio.write_tags(args.out_path + ".tags", tags)
    print(f"wrote {data.n} rows ({args.classes} classes, d={d})")
    return EXIT_CLEAN


_COMMANDS = {
    "fit": _cmd_fit,
    "analyze": _cmd_analyze,
    "poison": _cmd_poison,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
