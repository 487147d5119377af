"""Monte Carlo size/power study for the conditional mean independence tests.

Data-generating process
-----------------------
All four models share one equation,

    Y = -Z + b * Z^3 + f(X) + eps,      Z, X ~ N(0, 1),  eps ~ N(0, 4),

with f(x) = c*x ("linear") or sin(c*pi*x) ("sine").  The model id follows
from the (b, f_kind) pair:

    1: b=0 linear    2: b=0 sine    3: b=1 linear    4: b=1 sine

c = 0 makes X irrelevant (the null); growing c strengthens the signal.
Models 3-4 keep conditional mean independence at c = 0 but break the
linear working model for E(Y|Z), which is exactly the stress they exist
to apply.

Random streams
--------------
Every replicate of every grid cell owns counter-based streams derived
from ``SeedSequence((seed, model_id, c_enc, n, replicate, k))`` where
``c_enc = round(c * 1e9)`` and ``k`` selects the purpose: 0 draws the
sample, 1 seeds the linmdd permutation plan, 2 seeds the mdd plan.
Consequences: adding tests, alphas, models, or sample sizes to a run
never disturbs the draws of any other cell, replicates can run on any
number of threads in any schedule, and partial reruns are comparable.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from math import sqrt
from pathlib import Path

import numpy as np

from .errors import InputFormatError
from .inference import PermutationPlan, linmdd_test, mdd_test, partial_f_test
from .sample import Sample

__all__ = [
    "ModelSpec",
    "model_specs",
    "catalog",
    "generate",
    "Profile",
    "PROFILES",
    "PowerRow",
    "PowerTable",
    "run_grid",
    "emit_table",
    "read_table",
    "DEFAULT_N_GRID",
    "DEFAULT_ALPHAS",
    "KNOWN_TESTS",
]

DEFAULT_N_GRID = (20, 30, 50, 70, 100)
DEFAULT_ALPHAS = (0.05, 0.1)
KNOWN_TESTS = ("linmdd", "partial-f", "mdd")

_MODEL_IDS = {(0.0, "linear"): 1, (0.0, "sine"): 2, (1.0, "linear"): 3, (1.0, "sine"): 4}
_C_GRIDS = {
    1: (0.0, 2.0 / 3.0, 1.0, 1.5),
    2: (0.25, 1.0 / 3.0, 0.5),
    3: (0.0, 2.0 / 3.0, 1.0, 1.5),
    4: (0.25, 1.0 / 3.0, 0.5),
}

# Stream-purpose indices (the k of the module docstring).
_K_SAMPLE = 0
_K_LINMDD_PLAN = 1
_K_MDD_PLAN = 2


@dataclass(frozen=True)
class ModelSpec:
    """One point of the model catalog: cubic coefficient b, f shape, signal c."""

    b: float
    f_kind: str
    c: float
    noise_sd: float = 2.0

    def __post_init__(self):
        if float(self.b) not in (0.0, 1.0):
            raise ValueError(f"b must be 0 or 1, got {self.b}")
        if self.f_kind not in ("linear", "sine"):
            raise ValueError(f"f_kind must be 'linear' or 'sine', got {self.f_kind!r}")
        if not self.c >= 0.0:
            raise ValueError(f"c must be nonnegative, got {self.c}")
        if not self.noise_sd > 0.0:
            raise ValueError(f"noise_sd must be positive, got {self.noise_sd}")
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "noise_sd", float(self.noise_sd))

    @property
    def model_id(self) -> int:
        return _MODEL_IDS[(self.b, self.f_kind)]

    @property
    def is_null(self) -> bool:
        """True when X does not enter the mean of Y at all."""
        return self.c == 0.0


def model_specs(model_id: int) -> tuple[ModelSpec, ...]:
    """The catalog entries (one per c value) for a single model id."""
    if model_id not in _C_GRIDS:
        raise ValueError(f"unknown model id {model_id}; choose from 1-4")
    b = 0.0 if model_id in (1, 2) else 1.0
    f_kind = "linear" if model_id in (1, 3) else "sine"
    return tuple(ModelSpec(b=b, f_kind=f_kind, c=c) for c in _C_GRIDS[model_id])


def catalog(model_ids=(1, 2, 3, 4)) -> tuple[ModelSpec, ...]:
    """Flattened catalog over the requested model ids, in id order."""
    specs: list[ModelSpec] = []
    for mid in model_ids:
        specs.extend(model_specs(mid))
    return tuple(specs)


def generate(model: ModelSpec, n: int, rng: np.random.Generator) -> Sample:
    """Draw one sample of size n; draw order is Z, then X, then eps."""
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    z = rng.standard_normal((n, 1))
    x = rng.standard_normal((n, 1))
    eps = model.noise_sd * rng.standard_normal((n, 1))
    if model.f_kind == "linear":
        fx = model.c * x
    else:
        fx = np.sin(model.c * np.pi * x)
    y = -z + model.b * z**3 + fx + eps
    return Sample(x=x, y=y, z=z)


@dataclass(frozen=True)
class Profile:
    """Preset (replications, permutations) pair for a grid run."""

    replications: int
    num_permutations: int


PROFILES = {
    "desk": Profile(replications=200, num_permutations=199),
    "paper": Profile(replications=1000, num_permutations=500),
}


@dataclass(frozen=True)
class PowerRow:
    """One grid cell: rejection rate of one test at one (model, c, n, alpha)."""

    model_id: int
    b: float
    f_kind: str
    c: float
    n: int
    alpha: float
    test: str
    replications: int
    rejections: int
    rate: float
    stderr: float
    seed: int

    @classmethod
    def from_counts(
        cls, model: ModelSpec, n: int, alpha: float, test: str,
        replications: int, rejections: int, seed: int,
    ) -> "PowerRow":
        rate = rejections / replications
        return cls(
            model_id=model.model_id,
            b=model.b,
            f_kind=model.f_kind,
            c=model.c,
            n=n,
            alpha=alpha,
            test=test,
            replications=replications,
            rejections=rejections,
            rate=rate,
            stderr=sqrt(rate * (1.0 - rate) / replications),
            seed=seed,
        )


_COLUMNS = [f.name for f in fields(PowerRow)]
_INT_COLUMNS = {"model_id", "n", "replications", "rejections", "seed"}
_FLOAT_COLUMNS = {"b", "c", "alpha", "rate", "stderr"}


@dataclass(frozen=True)
class PowerTable:
    """Rejection-rate grid; rows are uniquely keyed by (model_id, c, n, alpha, test)."""

    rows: tuple[PowerRow, ...]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def lookup(self, model_id: int, c: float, n: int, alpha: float, test: str) -> PowerRow:
        for row in self.rows:
            if (row.model_id, row.c, row.n, row.alpha, row.test) == (model_id, c, n, alpha, test):
                return row
        raise KeyError(f"no grid cell ({model_id}, {c}, {n}, {alpha}, {test!r})")

    def rate(self, model_id: int, c: float, n: int, alpha: float, test: str) -> float:
        return self.lookup(model_id, c, n, alpha, test).rate


def _canonical_test(name: str) -> str:
    canon = name.replace("_", "-")
    if canon not in KNOWN_TESTS:
        raise ValueError(f"unknown test {name!r}; choose from {', '.join(KNOWN_TESTS)}")
    return canon


def _stream(seed: int, model: ModelSpec, n: int, replicate: int, k: int) -> np.random.SeedSequence:
    c_enc = int(round(model.c * 1e9))
    return np.random.SeedSequence(entropy=(seed, model.model_id, c_enc, n, replicate, k))


def _rng(ss: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(ss))


def _plan_seed(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, np.uint64)[0])


def _replicate_pvalues(
    model: ModelSpec, n: int, replicate: int, tests: tuple[str, ...],
    num_permutations: int, seed: int, intercept: bool,
) -> dict[str, float]:
    sample = generate(model, n, _rng(_stream(seed, model, n, replicate, _K_SAMPLE)))
    pvals: dict[str, float] = {}
    for test in tests:
        if test == "linmdd":
            plan = PermutationPlan(
                num_permutations, _plan_seed(_stream(seed, model, n, replicate, _K_LINMDD_PLAN))
            )
            pvals[test] = linmdd_test(sample, plan, intercept=intercept).p_value
        elif test == "mdd":
            plan = PermutationPlan(
                num_permutations, _plan_seed(_stream(seed, model, n, replicate, _K_MDD_PLAN))
            )
            pvals[test] = mdd_test(sample.x, sample.y, plan).p_value
        else:
            pvals[test] = partial_f_test(sample, intercept=intercept).p_value
    return pvals


def run_grid(
    models,
    n_grid=DEFAULT_N_GRID,
    alphas=DEFAULT_ALPHAS,
    replications: int = 1000,
    num_permutations: int = 500,
    tests=("linmdd",),
    seed: int | None = None,
    intercept: bool = False,
    threads: int = 1,
) -> PowerTable:
    """Rejection rates of the requested tests over models x n_grid x alphas.

    The run is deterministic given ``seed`` (required) for any thread
    count.  A replicate that raises aborts the whole run; nothing is
    dropped silently.  ``intercept`` is off by default because the
    catalog models carry no constant term.
    """
    if seed is None:
        raise ValueError("run_grid requires an explicit seed")
    if replications < 1:
        raise ValueError(f"need at least one replication, got {replications}")
    models = tuple(models)
    tests = tuple(_canonical_test(t) for t in tests)
    alphas = tuple(float(a) for a in alphas)

    rows: list[PowerRow] = []
    for model in models:
        for n in n_grid:
            worker = lambda rep: _replicate_pvalues(
                model, n, rep, tests, num_permutations, seed, intercept
            )
            reps = range(1, replications + 1)
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    pvalues = list(pool.map(worker, reps))
            else:
                pvalues = [worker(rep) for rep in reps]
            for alpha in alphas:
                for test in tests:
                    rejections = sum(1 for pv in pvalues if pv[test] < alpha)
                    rows.append(
                        PowerRow.from_counts(
                            model, n, alpha, test, replications, rejections, seed
                        )
                    )
    return PowerTable(rows=tuple(rows))


def _format_cell(name: str, value) -> str:
    # repr() of a float round-trips exactly through float(), which is what
    # makes emit/read lossless.
    return repr(value) if name in _FLOAT_COLUMNS else str(value)


def emit_table(table: PowerTable, fmt: str, path) -> None:
    """Write the grid to ``path`` as csv or json; round-trips losslessly."""
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_COLUMNS)
            for row in table:
                writer.writerow(
                    [_format_cell(name, getattr(row, name)) for name in _COLUMNS]
                )
    elif fmt == "json":
        records = [
            {name: getattr(row, name) for name in _COLUMNS} for row in table
        ]
        with open(path, "w") as fh:
            json.dump(records, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValueError(f"unknown table format {fmt!r}; choose csv or json")


def _row_from_record(record: dict, where: str) -> PowerRow:
    values = {}
    for name in _COLUMNS:
        if name not in record:
            raise InputFormatError(f"{where}: missing column {name!r}")
        raw = record[name]
        try:
            if name in _INT_COLUMNS:
                values[name] = int(raw)
            elif name in _FLOAT_COLUMNS:
                values[name] = float(raw)
            else:
                values[name] = str(raw)
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"{where}: bad value for {name!r}: {raw!r}") from exc
    return PowerRow(**values)


def read_table(path, fmt: str | None = None) -> PowerTable:
    """Parse a table written by :func:`emit_table` (format inferred from suffix)."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputFormatError(f"{path}: empty file, expected a header row")
            if header != _COLUMNS:
                raise InputFormatError(
                    f"{path}: bad header {header!r}, expected {_COLUMNS!r}"
                )
            rows = []
            for lineno, record in enumerate(reader, start=2):
                if len(record) != len(_COLUMNS):
                    raise InputFormatError(
                        f"{path}: row {lineno} has {len(record)} fields, expected {len(_COLUMNS)}"
                    )
                rows.append(_row_from_record(dict(zip(_COLUMNS, record)), f"{path}: row {lineno}"))
        return PowerTable(rows=tuple(rows))
    if fmt == "json":
        with open(path) as fh:
            records = json.load(fh)
        if not isinstance(records, list):
            raise InputFormatError(f"{path}: expected a JSON array of records")
        return PowerTable(
            rows=tuple(
                _row_from_record(rec, f"{path}: record {i}") for i, rec in enumerate(records)
            )
        )
    raise ValueError(f"unknown table format {fmt!r}; choose csv or json")
