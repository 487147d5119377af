"""Command-line front end: statistic, tests, simulation grids, case studies.

Four subcommands: ``mdd`` evaluates the statistic on two matrix files,
``test`` runs one hypothesis test on matrix files, ``simulate`` emits a
Monte Carlo power table, and ``finance`` replays a factor case study.
JSON on stdout (or at --output) is the machine interface and is
byte-identical across reruns with the same flags; ``--format table`` is
a human view with no stability guarantee.

Exit codes: 0 success, 2 input error (missing/ragged/non-numeric data,
bad flags, unknown case), 3 numerical error (rank-deficient designs --
the message suggests --ridge-penalty -- or an internal consistency
failure).

Matrix files are delimiter-separated numeric text, one observation per
row, comma or whitespace delimited; ``--header`` skips a single header
row.  ``test`` and ``finance`` default to seed 1729 (documented here so
published numbers can name their provenance); ``simulate`` refuses to
run without an explicit --seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from math import sqrt
from pathlib import Path

import numpy as np

from .errors import (
    ConsistencyError,
    DimensionMismatch,
    InputFormatError,
    InvalidPlan,
    MissingColumn,
    MissingValue,
    NonFiniteData,
    NonNumericCell,
    RankDeficient,
    UnsupportedResponseDim,
)
from .finance import (
    DEFAULT_SCHEMA,
    PanelSchema,
    builtin_panel_path,
    builtin_specs,
    load_panel,
    run_case,
)
from .inference import PermutationPlan, TestReport, linmdd_test, mdd_test, partial_f_test
from .kernel import mdd_squared
from .sample import Sample
from .simulation import KNOWN_TESTS, PROFILES, catalog, emit_table, run_grid

__all__ = ["DEFAULT_SEED", "read_matrix", "build_parser", "main", "entry_point"]

DEFAULT_SEED = 1729
_LOG = logging.getLogger("linmdd.cli")


def read_matrix(path, header: bool = False) -> np.ndarray:
    """Parse one observation per row from delimiter-separated text."""
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with open(path) as fh:
        lines = list(enumerate(fh, start=1))
    if header:
        lines = lines[1:]
    for lineno, line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = stripped.split(",") if "," in stripped else stripped.split()
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise InputFormatError(
                f"{path}: row {lineno}: expected {width} fields, got {len(cells)}"
            )
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError:
            bad = next(c for c in cells if not _is_float(c))
            raise InputFormatError(f"{path}: row {lineno}: non-numeric value {bad!r}")
    if not rows:
        raise InputFormatError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _emit(payload: dict, args) -> None:
    """Print or write the machine-readable result of one command."""
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    output = getattr(args, "output", None)
    if output is not None:
        Path(output).write_text(text)
        _summarize(payload, output)
    elif getattr(args, "format", "json") == "table":
        for key in sorted(payload):
            print(f"{key:>16}: {payload[key]}")
    else:
        sys.stdout.write(text)


def _summarize(payload: dict, output) -> None:
    if "p_value" in payload:
        print(
            f"{payload.get('name', payload.get('test'))}: p={payload['p_value']:.4g} "
            f"{payload['decision']} (wrote {output})"
        )
    else:
        print(f"wrote {output}")


def _report_payload(report: TestReport, include_replicates: bool = False) -> dict:
    return report.to_dict(include_replicates=include_replicates)


def _cmd_mdd(args) -> int:
    x = read_matrix(args.x, header=args.header)
    y = read_matrix(args.y, header=args.header)
    value = mdd_squared(x, y)
    _emit({"mdd_squared": value, "mdd": sqrt(value)}, args)
    return 0


def _cmd_test(args) -> int:
    x = read_matrix(args.x, header=args.header)
    y = read_matrix(args.y, header=args.header)
    if args.method == "mdd":
        if args.z is not None:
            raise InputFormatError("the mdd method tests E(Y|X) = E(Y) and takes no Z block")
        plan = PermutationPlan(args.num_permutations, args.seed)
        report = mdd_test(x, y, plan, alpha=args.alpha, corrected=args.corrected,
                          threads=args.threads)
    else:
        if args.z is None:
            raise InputFormatError(f"the {args.method} method needs a Z block")
        z = read_matrix(args.z, header=args.header)
        sample = Sample(x=x, y=y, z=z)
        if args.method == "partial-f":
            report = partial_f_test(sample, alpha=args.alpha, intercept=args.intercept)
        else:
            plan = PermutationPlan(args.num_permutations, args.seed)
            method = "ols" if args.ridge_penalty is None else "ridge"
            report = linmdd_test(
                sample, plan, alpha=args.alpha, intercept=args.intercept,
                method=method, ridge_penalty=args.ridge_penalty,
                corrected=args.corrected, threads=args.threads,
            )
    _emit(_report_payload(report), args)
    return 0


def _parse_ids(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise InputFormatError(f"bad model list {text!r}; expected e.g. 1,2")


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise InputFormatError(f"bad numeric list {text!r}")


def _cmd_simulate(args) -> int:
    profile = PROFILES[args.profile]
    replications = args.replications if args.replications is not None else profile.replications
    num_permutations = (
        args.num_permutations if args.num_permutations is not None else profile.num_permutations
    )
    models = catalog(_parse_ids(args.models))
    n_grid = tuple(int(n) for n in _parse_ids(args.n_grid)) if args.n_grid else None
    kwargs = {} if n_grid is None else {"n_grid": n_grid}
    if args.alphas:
        kwargs["alphas"] = _parse_floats(args.alphas)
    _LOG.debug(
        "grid: %d model points, replications=%d, B=%d", len(models), replications, num_permutations
    )
    table = run_grid(
        models,
        replications=replications,
        num_permutations=num_permutations,
        tests=tuple(args.tests.split(",")),
        seed=args.seed,
        intercept=args.intercept,
        threads=args.threads,
        **kwargs,
    )
    emit_table(table, args.format, args.output)
    print(f"wrote {len(table)} rows to {args.output}")
    return 0


def _cmd_finance(args) -> int:
    schema = DEFAULT_SCHEMA if args.schema is None else PanelSchema.from_config(args.schema)
    panel_path = args.panel if args.panel is not None else builtin_panel_path()
    panel = load_panel(panel_path, schema)
    spec = next(s for s in builtin_specs() if s.name == args.case)
    plan = PermutationPlan(args.num_permutations, args.seed)
    _LOG.debug("case %s on %s (n=%d)", spec.name, panel_path, panel.n)
    report = run_case(panel, spec, plan, alpha=args.alpha)
    _emit(_report_payload(report), args)
    return 0


def _add_plan_flags(parser, default_alpha: float) -> None:
    parser.add_argument(
        "-B", "--B", "--num-permutations", dest="num_permutations", type=int, default=500,
        metavar="B", help="number of permutation replicates (default 500)",
    )
    parser.add_argument(
        "--seed", type=int, default=DEFAULT_SEED,
        help=f"permutation seed (default {DEFAULT_SEED})",
    )
    parser.add_argument(
        "--alpha", type=float, default=default_alpha,
        help=f"significance level (default {default_alpha})",
    )
    parser.add_argument(
        "--corrected", action="store_true",
        help="use the (1+count)/(1+B) p-value instead of count/B",
    )


def _add_output_flags(parser, formats=("json", "table")) -> None:
    parser.add_argument("--output", type=Path, default=None,
                        help="write the result to this path instead of stdout")
    parser.add_argument("--format", choices=formats, default=formats[0],
                        help="output format (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linmdd",
        description="Conditional mean independence testing via martingale difference divergence.",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for permutations/replications (default 1)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_mdd = sub.add_parser("mdd", help="evaluate the squared statistic on two matrix files")
    p_mdd.add_argument("x", help="explanatory block, one observation per row")
    p_mdd.add_argument("y", help="response block, one observation per row")
    p_mdd.add_argument("--header", action="store_true", help="skip one header row in each file")
    _add_output_flags(p_mdd)
    p_mdd.set_defaults(func=_cmd_mdd)

    p_test = sub.add_parser("test", help="run a hypothesis test on matrix files")
    p_test.add_argument("x", help="X block file")
    p_test.add_argument("y", help="Y block file")
    p_test.add_argument("z", nargs="?", default=None,
                        help="Z block file (omit for --method mdd)")
    p_test.add_argument("--method", choices=("linmdd", "partial-f", "mdd"), default="linmdd",
                        help="which test to run (default linmdd)")
    p_test.add_argument("--header", action="store_true", help="skip one header row in each file")
    p_test.add_argument("--intercept", action="store_true",
                        help="append a ones column to Z before fitting")
    p_test.add_argument("--ridge-penalty", type=float, default=None,
                        help="fit the residualizing regression by ridge with this penalty")
    _add_plan_flags(p_test, default_alpha=0.05)
    _add_output_flags(p_test)
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo size/power grid")
    p_sim.add_argument("--profile", choices=sorted(PROFILES), default="desk",
                       help="replications/permutations preset (default desk)")
    p_sim.add_argument("--models", default="1,2,3,4",
                       help="comma-separated model ids from 1-4 (default all)")
    p_sim.add_argument("--tests", default="linmdd",
                       help=f"comma-separated tests from {{{','.join(KNOWN_TESTS)}}}")
    p_sim.add_argument("--n-grid", default=None,
                       help="comma-separated sample sizes (default 20,30,50,70,100)")
    p_sim.add_argument("--alphas", default=None,
                       help="comma-separated significance levels (default 0.05,0.1)")
    p_sim.add_argument("--replications", type=int, default=None,
                       help="override the profile's replication count")
    p_sim.add_argument("-B", "--B", "--num-permutations", dest="num_permutations", type=int,
                       default=None, metavar="B", help="override the profile's permutation count")
    p_sim.add_argument("--intercept", action="store_true",
                       help="fit the residualizing regressions with an intercept")
    p_sim.add_argument("--seed", type=int, required=True,
                       help="master seed (required; grids must be attributable)")
    p_sim.add_argument("--output", type=Path, required=True, help="destination table path")
    p_sim.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="table format (default csv)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_fin = sub.add_parser("finance", help="replay a factor-model case study")
    p_fin.add_argument("--case", required=True, choices=[s.name for s in builtin_specs()],
                       help="which case study to run")
    p_fin.add_argument("--panel", type=Path, default=None,
                       help="factor panel CSV (default: packaged 1964-2016 fixture)")
    p_fin.add_argument("--schema", type=Path, default=None,
                       help="JSON schema config mapping file columns to roles")
    _add_plan_flags(p_fin, default_alpha=0.1)
    _add_output_flags(p_fin)
    p_fin.set_defaults(func=_cmd_finance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except RankDeficient as exc:
        print(f"error: {exc} (hint: pass --ridge-penalty to regularize)", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        InputFormatError,
        MissingColumn,
        MissingValue,
        NonNumericCell,
        DimensionMismatch,
        NonFiniteData,
        UnsupportedResponseDim,
        InvalidPlan,
        OSError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    raise SystemExit(main())
