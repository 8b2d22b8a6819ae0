"""Command-line entry point: ``thresholds``, ``reproduce`` and ``fuse``.

Exit codes: 0 success, 2 usage or invalid input, 3 mathematically infeasible,
4 problem too large for the requested method. Failures with codes 3 and 4
print a JSON error object on stdout; usage errors go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from importlib import resources
from typing import Optional, Sequence

import jsonschema

from .detector import ConfusionRow, Rule, build_rule, confusion_row
from .errors import DegenerateError, InfeasibleError, SizeLimitError, TernarySenseError
from .fusion import build_policy
from .harness import FIGURES, ExperimentSpec, atomic_write, figure_spec, reference_scene, run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_RESOURCE = 4

_DEFAULT_SCENE = reference_scene()
_RULES = {"glrt": Rule.GLRT, "rao": Rule.RAO, "upper-low": Rule.UPPER_LOW, "upper-high": Rule.UPPER_HIGH}


class UsageError(Exception):
    pass


def load_schema(name: str) -> dict:
    text = resources.files("ternary_sense").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _validate(doc, schema_name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        raise UsageError(f"{schema_name}: {exc.message}") from None


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from None


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _error_doc(exc: BaseException, code: int) -> dict:
    return {"error": type(exc).__name__, "message": str(exc), "exit_code": code}


# -- subcommands ----------------------------------------------------------------------------


def cmd_thresholds(args: argparse.Namespace) -> int:
    regions = build_rule(_RULES[args.rule], args.n, args.sigma0, args.sigma1, args.alpha, args.beta)
    doc = regions.thresholds.to_dict()
    _validate(doc, "thresholds")
    _emit(doc)
    return EXIT_OK


def _config_overrides(path: str) -> dict:
    doc = _read_json(path)
    _validate(doc, "experiment_config")
    return doc


def cmd_reproduce(args: argparse.Namespace) -> int:
    runner, spec = figure_spec(args.figure, trials=args.trials, seed=args.seed, coexist=args.coexist)
    out = args.out
    if args.config:
        overrides = _config_overrides(args.config)
        runner = overrides.pop("runner", runner)
        out = out or overrides.pop("out", None)
        overrides.pop("out", None)
        overrides.pop("format", None)
        merged = spec.to_dict()
        merged.update(overrides)
        if args.trials is not None:
            merged["trials"] = args.trials
        if args.seed is not None:
            merged["master_seed"] = args.seed
        spec = ExperimentSpec.from_dict(merged)
    if not out:
        raise UsageError("an output path is required (--out or 'out' in the config)")

    table = run(runner, spec)
    table.metadata["figure"] = str(args.figure)
    atomic_write(out, table.to_csv())
    statuses = Counter(v for c in table.columns if c.endswith("_status") for v in table.column(c).tolist())
    doc = {
        "figure": args.figure,
        "runner": runner,
        "out": out,
        "rows": len(table.rows),
        "spec_hash": spec.spec_hash(),
        "statuses": dict(sorted(statuses.items())),
    }
    _validate(doc, "reproduce_summary")
    _emit(doc)
    return EXIT_OK


def _rows_from_flags(args: argparse.Namespace, need_row2: bool) -> list[Optional[ConfusionRow]]:
    rule = _RULES[args.rule]
    if rule not in (Rule.GLRT, Rule.RAO):
        raise UsageError("fusion needs a two-sided local rule (glrt or rao)")
    regions = build_rule(rule, args.n, args.sigma0, args.sigma1, args.alpha, args.beta)
    rows = [confusion_row(regions, v, args.n) for v in (args.sigma0, args.sigma1)]
    if args.sigma2 is not None:
        rows.append(confusion_row(regions, args.sigma2, args.n))
    elif need_row2:
        raise UsageError("--method oracle49 requires --sigma2")
    else:
        rows.append(None)
    return rows


def _rows_from_config(path: str, need_row2: bool) -> list[Optional[ConfusionRow]]:
    doc = _read_json(path)
    _validate(doc, "local_rows")
    if need_row2 and "row2" not in doc:
        raise UsageError("--method oracle49 requires row2 in the config")
    return [ConfusionRow(*doc[key]) if key in doc else None for key in ("row0", "row1", "row2")]


def cmd_fuse(args: argparse.Namespace) -> int:
    need_row2 = args.method == "oracle49"
    rows = _rows_from_config(args.config, need_row2) if args.config else _rows_from_flags(args, need_row2)
    policy = build_policy(args.method, args.k, rows[0], rows[1], args.alpha_f, args.beta_f, row2=rows[2])
    doc = policy.to_dict()
    _validate(doc, "policy")
    _emit(doc)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------


def _add_scene_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=_DEFAULT_SCENE.n_samples, help="samples per sensing slot")
    p.add_argument("--sigma0", type=float, default=_DEFAULT_SCENE.sigma0_sq, help="noise variance (W)")
    p.add_argument("--sigma1", type=float, default=_DEFAULT_SCENE.sigma1_sq, help="legitimate-only variance (W)")
    p.add_argument("--alpha", type=float, default=0.8, help="required Pr(H0|H0), in (0.5, 1)")
    p.add_argument("--beta", type=float, default=0.8, help="required Pr(H1|H1), in (0.5, 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ternary-sense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="print the thresholds of a single-sensor rule as JSON")
    _add_scene_flags(p)
    p.add_argument("--rule", choices=sorted(_RULES), default="glrt")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("reproduce", help="run a figure preset and write its table as CSV")
    p.add_argument("--figure", type=int, choices=FIGURES, required=True)
    p.add_argument("--out", help="output CSV path (written atomically)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per hypothesis and grid point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--config", help="JSON overrides for the preset experiment")
    p.add_argument("--coexist", action="store_true", help="misuse variance includes the legitimate signal")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("fuse", help="build a fusion policy and print it as JSON")
    p.add_argument("--k", type=int, required=True, help="number of sensors")
    p.add_argument("--config", help="JSON file with local rows row0, row1 and optionally row2")
    _add_scene_flags(p)
    p.add_argument("--rule", choices=["glrt", "rao"], default="glrt", help="local rule when rows come from flags")
    p.add_argument("--sigma2", type=float, help="misuse variance (W); needed by oracle49")
    p.add_argument("--alpha-f", dest="alpha_f", type=float, required=True, help="required global Pr(H0|H0)")
    p.add_argument("--beta-f", dest="beta_f", type=float, required=True, help="required global Pr(H1|H1)")
    p.add_argument("--method", choices=["alg1", "opt51", "oracle49"], default="alg1")
    p.set_defaults(func=cmd_fuse)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        return args.func(args)
    except (InfeasibleError, DegenerateError) as exc:
        _emit(_error_doc(exc, EXIT_INFEASIBLE))
        return EXIT_INFEASIBLE
    except SizeLimitError as exc:
        _emit(_error_doc(exc, EXIT_RESOURCE))
        return EXIT_RESOURCE
    except (UsageError, TernarySenseError, ValueError) as exc:
        sys.stderr.write(json.dumps(_error_doc(exc, EXIT_USAGE), sort_keys=True) + "\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
