"""Command-line harness for the experiment campaigns.

Subcommands: stationary-check | convergence | prevalence | size | motif-total.
A plain-text config file ("key = value" lines, # comments, keys matching the
long flag names with - or _) can supply any flag; flags given on the command
line override file values.

Exit codes: 0 success, 2 configuration error, 3 non-ergodic walk
configuration, 4 no-observation failure rate above the threshold.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, LagwalkError, NonErgodicError, ObservationFailureError
from .experiments import (
    EXPERIMENTS,
    CampaignConfig,
    render_csv,
    run_campaign,
)
from .graph import MotifKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NON_ERGODIC = 3
EXIT_NO_OBSERVATIONS = 4

_DEFAULTS = {
    "stationary-check": dict(r="0.1 1 6", w="0 0.5 1", walk_length="1", replicates=1),
    "convergence": dict(r="1 0.1", w="1", walk_length="16", replicates=100_000),
    "prevalence": dict(r="0.1 6", w="1 0.01", walk_length="50 100", replicates=1000),
    "size": dict(r="0.1 6", w="1 0.01", walk_length="50 100", replicates=10_000),
    "motif-total": dict(r="0.1 6", w="1 0.01", walk_length="50 100", replicates=10_000),
}


def _float_list(text: str) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    if not parts:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(float(p) for p in parts)


def _int_list(text: str) -> tuple[int, ...]:
    parts = text.replace(",", " ").split()
    if not parts:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(int(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lagwalk",
        description="Lagged random-walk sampling experiments on simple undirected graphs.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} campaign")
        p.add_argument("--config", help="plain-text key=value config file")
        src = p.add_mutually_exclusive_group()
        src.add_argument("--graph", help="edge-list file to load")
        src.add_argument("--generate", action="store_true",
                         help="generate the core-periphery graph (default)")
        p.add_argument("--nodes", type=int, default=None)
        p.add_argument("--cases", type=int, default=None)
        p.add_argument("--p-cc", type=float, default=None, help="case-case edge probability")
        p.add_argument("--p-cn", type=float, default=None, help="case-noncase edge probability")
        p.add_argument("--p-nn", type=float, default=None, help="noncase-noncase edge probability")
        p.add_argument("--graph-seed", type=int, default=None,
                       help="generation seed (frozen default regenerates the demo graph)")
        p.add_argument("--r", type=_float_list, default=None, help="jump-rate grid")
        p.add_argument("--w", type=_float_list, default=None, help="backtracking-weight grid")
        p.add_argument("--walk-length", type=_int_list, default=None,
                       help="walk-length grid (states extracted per walk for `size`)")
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--replicates-ratio", type=int, default=None,
                       help="replicates for the ratio campaign of motif-total")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--init", default=None,
                       help="stationary | uniform | fixed:<node id>")
        p.add_argument("--burn-in", type=int, default=None)
        p.add_argument("--estimator", default=None, choices=["cr", "gr", "grcr", "all"])
        p.add_argument("--motif", default=None,
                       choices=[k.value for k in MotifKind])
        p.add_argument("--weights", default=None, choices=["multiplicity", "ppw"])
        p.add_argument("--normalization", default=None, choices=["exact", "estimated"])
        p.add_argument("--out", default=None, help="CSV output path (default stdout)")
        p.add_argument("--jobs", type=int, default=None, help="parallel worker processes")
        p.add_argument("--max-failure-rate", type=float, default=None)
    return parser


def read_config_file(path: str) -> dict[str, str]:
    """Parse "key = value" lines; '#' starts a comment; keys use - or _."""
    out: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
                key, value = line.split("=", 1)
                out[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return out


_FILE_KEYS = {
    "graph": str, "generate": bool, "nodes": int, "cases": int,
    "p_cc": float, "p_cn": float, "p_nn": float, "graph_seed": int,
    "r": _float_list, "w": _float_list, "walk_length": _int_list,
    "replicates": int, "replicates_ratio": int, "seed": int, "init": str,
    "burn_in": int, "estimator": str, "motif": str, "weights": str,
    "normalization": str, "out": str, "jobs": int, "max_failure_rate": float,
}


def _coerce_file_values(raw: dict[str, str]) -> dict:
    out = {}
    for key, text in raw.items():
        if key not in _FILE_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        typ = _FILE_KEYS[key]
        try:
            if typ is bool:
                out[key] = text.lower() in ("1", "true", "yes")
            else:
                out[key] = typ(text)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"config key {key!r}: bad value {text!r} ({exc})") from exc
    return out


def _pick(args: argparse.Namespace, file_values: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None and flag is not False:
        return flag
    if key in file_values:
        return file_values[key]
    return default


def make_config(args: argparse.Namespace) -> CampaignConfig:
    file_values = _coerce_file_values(read_config_file(args.config)) if args.config else {}
    exp = args.experiment
    defaults = _DEFAULTS[exp]
    init_text = _pick(args, file_values, "init", "stationary")
    init_node = None
    if init_text.startswith("fixed"):
        init, _, node_text = init_text.partition(":")
        if not node_text:
            raise ConfigError("fixed init needs a node id, e.g. --init fixed:0")
        try:
            init_node = int(node_text)
        except ValueError as exc:
            raise ConfigError(f"bad fixed-init node id {node_text!r}") from exc
        init = "fixed"
    else:
        init = init_text
    estimator = _pick(args, file_values, "estimator", "all")
    estimators = ("cr", "gr", "grcr") if estimator == "all" else (estimator,)
    motif_text = _pick(args, file_values, "motif", "triangle")
    try:
        motif = MotifKind(motif_text)
    except ValueError as exc:
        raise ConfigError(f"unknown motif {motif_text!r}") from exc
    replicates = _pick(args, file_values, "replicates", defaults["replicates"])
    # an explicit --init narrows the convergence campaign to that start mode
    if exp == "convergence" and _pick(args, file_values, "init", None) is not None:
        convergence_inits = (init,)
    else:
        convergence_inits = CampaignConfig.convergence_inits
    return CampaignConfig(
        convergence_inits=convergence_inits,
        experiment=exp,
        graph_path=_pick(args, file_values, "graph", None),
        n_nodes=_pick(args, file_values, "nodes", 100),
        n_cases=_pick(args, file_values, "cases", 20),
        p_case_case=_pick(args, file_values, "p_cc", CampaignConfig.p_case_case),
        p_case_noncase=_pick(args, file_values, "p_cn", CampaignConfig.p_case_noncase),
        p_noncase_noncase=_pick(args, file_values, "p_nn", CampaignConfig.p_noncase_noncase),
        graph_seed=_pick(args, file_values, "graph_seed", CampaignConfig.graph_seed),
        r_values=_pick(args, file_values, "r", _float_list(defaults["r"])),
        w_values=_pick(args, file_values, "w", _float_list(defaults["w"])),
        lengths=_pick(args, file_values, "walk_length", _int_list(defaults["walk_length"])),
        replicates=replicates,
        replicates_ratio=_pick(args, file_values, "replicates_ratio", 1000),
        seed=_pick(args, file_values, "seed", 1),
        init=init,
        init_node=init_node,
        burn_in=_pick(args, file_values, "burn_in", None),
        estimators=estimators,
        motif=motif,
        weights=_pick(args, file_values, "weights", "multiplicity"),
        normalization=_pick(args, file_values, "normalization", "estimated"),
        out=_pick(args, file_values, "out", None),
        jobs=_pick(args, file_values, "jobs", 1),
        max_failure_rate=_pick(args, file_values, "max_failure_rate", 0.1),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the config-error code
        return int(exc.code) if exc.code else EXIT_OK
    try:
        cfg = make_config(args)
        rows, columns = run_campaign(cfg)
        if not cfg.out:
            sys.stdout.write(render_csv(rows, columns))
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonErgodicError as exc:
        print(f"error: non-ergodic configuration: {exc}", file=sys.stderr)
        return EXIT_NON_ERGODIC
    except ObservationFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_OBSERVATIONS
    except LagwalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
