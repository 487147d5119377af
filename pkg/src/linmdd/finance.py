"""Factor-model case studies: does a factor block add explanatory power?

A :class:`FactorPanel` holds annual observations of the five explanatory
factors (market excess return, SMB, HML, RMW, CMA), the risk-free rate,
and one asset's excess return, all in decimal units.  Input files may
store percent or decimal, and may carry raw or excess asset returns; the
loader normalizes both so nothing downstream ever mixes units.

Three built-in case studies ship with the package:

    capm-vs-ff3     X = (SMB, HML)      Z = (1, m)
    ff3-vs-ff5      X = (RMW, CMA)      Z = (1, m, SMB, HML)
    hml-redundancy  X = (HML,)          Z = (1, m, SMB, RMW, CMA)

with Y the asset's excess return throughout.  The constant column named
``const`` is always the first entry of ``z_columns`` and is materialized
as ones — the working model for E(Y|Z) carries its intercept inside Z,
so :func:`run_case` calls the test with the intercept flag off.

The packaged panel (annual, 1964-2016, n = 53) is a calibrated synthetic
snapshot, not downloaded data; see its header comment and the repository
README for provenance.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from importlib.resources import files as _package_files
from pathlib import Path

import numpy as np

from .errors import InputFormatError, MissingColumn, MissingValue, NonNumericCell
from .inference import PermutationPlan, TestReport, linmdd_test
from .sample import Sample

__all__ = [
    "FACTOR_ROLES",
    "PanelSchema",
    "DEFAULT_SCHEMA",
    "SAVED_SCHEMA",
    "FactorPanel",
    "CaseStudySpec",
    "load_panel",
    "save_panel",
    "builtin_specs",
    "builtin_panel_path",
    "load_builtin_panel",
    "run_case",
    "assemble_sample",
]

# Return-series roles every panel must provide (besides the year column).
FACTOR_ROLES = ("mkt_excess", "smb", "hml", "rmw", "cma", "rf")
_ASSET_ROLES = ("asset_raw", "asset_excess")
CONST_COLUMN = "const"

_FIXTURE_NAME = "ff_factors_annual_1964_2016.csv"


@dataclass(frozen=True)
class PanelSchema:
    """Maps panel roles to file column names and declares the file's units.

    ``columns`` is keyed by role: the six entries of :data:`FACTOR_ROLES`,
    a ``year`` role, and exactly one of ``asset_raw`` (loader subtracts
    the risk-free rate) or ``asset_excess`` (used as-is).
    """

    columns: dict
    units: str = "percent"

    def __post_init__(self):
        if self.units not in ("percent", "decimal"):
            raise ValueError(f"units must be 'percent' or 'decimal', got {self.units!r}")
        roles = set(self.columns)
        required = {"year", *FACTOR_ROLES}
        missing = sorted(required - roles)
        if missing:
            raise ValueError(f"schema lacks roles: {', '.join(missing)}")
        asset = roles & set(_ASSET_ROLES)
        if len(asset) != 1:
            raise ValueError("schema needs exactly one of asset_raw / asset_excess")
        unknown = sorted(roles - required - set(_ASSET_ROLES))
        if unknown:
            raise ValueError(f"schema has unknown roles: {', '.join(unknown)}")

    @property
    def asset_role(self) -> str:
        return "asset_raw" if "asset_raw" in self.columns else "asset_excess"

    @classmethod
    def from_config(cls, config) -> "PanelSchema":
        """Build from a config mapping file column names to roles.

        ``config`` is a dict (or path to a JSON file holding one) shaped
        ``{"units": "percent", "columns": {"<file column>": "<role>"}}``.
        """
        if not isinstance(config, dict):
            with open(config) as fh:
                config = json.load(fh)
        name_to_role = config.get("columns")
        if not isinstance(name_to_role, dict):
            raise InputFormatError("schema config needs a 'columns' mapping of column name to role")
        columns: dict = {}
        for name, role in name_to_role.items():
            if role in columns:
                raise InputFormatError(f"schema config maps two columns to role {role!r}")
            columns[role] = name
        return cls(columns=columns, units=config.get("units", "percent"))


DEFAULT_SCHEMA = PanelSchema(
    columns={
        "year": "year",
        "mkt_excess": "mkt_rf",
        "smb": "smb",
        "hml": "hml",
        "rmw": "rmw",
        "cma": "cma",
        "rf": "rf",
        "asset_raw": "ba",
    },
    units="percent",
)

# What save_panel emits: canonical names, decimal units, excess returns.
SAVED_SCHEMA = PanelSchema(
    columns={"year": "year", "asset_excess": "asset_excess", **{r: r for r in FACTOR_ROLES}},
    units="decimal",
)


@dataclass(frozen=True)
class FactorPanel:
    """Annual factor panel in canonical decimal units."""

    years: tuple
    mkt_excess: np.ndarray
    smb: np.ndarray
    hml: np.ndarray
    rmw: np.ndarray
    cma: np.ndarray
    rf: np.ndarray
    asset_excess: np.ndarray

    def __post_init__(self):
        years = tuple(int(y) for y in self.years)
        object.__setattr__(self, "years", years)
        if len(years) < 10:
            raise InputFormatError(f"panel needs at least 10 years, got {len(years)}")
        if any(b <= a for a, b in zip(years, years[1:])):
            raise InputFormatError("panel years must be strictly increasing")
        for name in self.column_names():
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (len(years),):
                raise InputFormatError(
                    f"column {name!r} has {arr.shape[0]} values for {len(years)} years"
                )
            if not np.all(np.isfinite(arr)):
                raise MissingValue(f"column {name!r} contains missing values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @staticmethod
    def column_names() -> tuple:
        return (*FACTOR_ROLES, "asset_excess")

    @property
    def n(self) -> int:
        return len(self.years)

    def column(self, name: str) -> np.ndarray:
        """A data column by canonical name (`const` is made of ones)."""
        if name == CONST_COLUMN:
            return np.ones(self.n)
        if name not in self.column_names():
            raise MissingColumn(f"panel has no column {name!r}")
        return getattr(self, name)


def _split_line(line: str):
    # Single header row, delimiter-separated; prefer comma, then tab,
    # then semicolon, falling back to whitespace.
    for delim in (",", "\t", ";"):
        if delim in line:
            return [cell.strip() for cell in line.split(delim)]
    return line.split()


def load_panel(path, schema: PanelSchema = DEFAULT_SCHEMA) -> FactorPanel:
    """Read, validate, and normalize a delimiter-separated factor panel.

    Returns are converted to decimal if the schema declares percent; the
    asset's excess return is computed as raw minus risk-free when the
    schema maps ``asset_raw``.
    """
    path = Path(path)
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InputFormatError(f"{path}: empty file, expected a header row")
    header = _split_line(lines[0])
    positions: dict = {}
    for role in ("year", *FACTOR_ROLES, schema.asset_role):
        name = schema.columns[role]
        if name not in header:
            raise MissingColumn(f"{path}: missing column {name!r} (role {role})")
        positions[role] = header.index(name)

    years: list = []
    series: dict = {role: [] for role in (*FACTOR_ROLES, schema.asset_role)}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = _split_line(line)
        if len(cells) < len(header):
            raise MissingValue(
                f"{path}: row {lineno} has {len(cells)} cells, expected {len(header)}"
            )
        if len(cells) > len(header):
            raise InputFormatError(
                f"{path}: row {lineno} has {len(cells)} cells, expected {len(header)}"
            )
        raw_year = cells[positions["year"]]
        try:
            year = int(raw_year)
        except ValueError:
            raise NonNumericCell(f"{path}: row {lineno}: year {raw_year!r} is not an integer")
        for role in series:
            cell = cells[positions[role]]
            if cell == "" or cell.upper() in ("NA", "NAN", "NULL"):
                raise MissingValue(
                    f"{path}: row {lineno} (year {year}): missing value in column "
                    f"{schema.columns[role]!r}"
                )
            try:
                value = float(cell)
            except ValueError:
                raise NonNumericCell(
                    f"{path}: row {lineno} (year {year}): non-numeric cell {cell!r} in column "
                    f"{schema.columns[role]!r}"
                )
            if not np.isfinite(value):
                raise MissingValue(
                    f"{path}: row {lineno} (year {year}): non-finite value in column "
                    f"{schema.columns[role]!r}"
                )
            series[role].append(value)
        years.append(year)

    scale = 0.01 if schema.units == "percent" else 1.0
    columns = {role: np.asarray(vals) * scale for role, vals in series.items()}
    if schema.asset_role == "asset_raw":
        asset_excess = columns.pop("asset_raw") - columns["rf"]
    else:
        asset_excess = columns.pop("asset_excess")
    return FactorPanel(years=tuple(years), asset_excess=asset_excess, **columns)


def save_panel(panel: FactorPanel, path) -> None:
    """Write a panel with canonical names in decimal units.

    Float cells use repr, so ``load_panel(path, SAVED_SCHEMA)`` restores
    the panel bit for bit.
    """
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", *panel.column_names()])
        for i, year in enumerate(panel.years):
            writer.writerow(
                [year, *(repr(float(getattr(panel, name)[i])) for name in panel.column_names())]
            )


def builtin_panel_path() -> Path:
    """Filesystem path of the packaged 1964-2016 annual panel fixture."""
    return Path(str(_package_files("linmdd").joinpath("data", _FIXTURE_NAME)))


def load_builtin_panel() -> FactorPanel:
    return load_panel(builtin_panel_path(), DEFAULT_SCHEMA)


@dataclass(frozen=True)
class CaseStudySpec:
    """Variable assignment of one case study.

    ``z_columns`` always begins with the constant column; it is prepended
    here if the caller leaves it out.  The x/z/y column sets must be
    disjoint.
    """

    name: str
    x_columns: tuple
    z_columns: tuple
    y_column: str

    def __post_init__(self):
        x = tuple(self.x_columns)
        z = tuple(self.z_columns)
        if CONST_COLUMN not in z:
            z = (CONST_COLUMN, *z)
        elif z[0] != CONST_COLUMN:
            raise ValueError(f"{CONST_COLUMN!r} must come first in z_columns")
        object.__setattr__(self, "x_columns", x)
        object.__setattr__(self, "z_columns", z)
        if not x:
            raise ValueError("x_columns must not be empty")
        claimed = [*x, *z, self.y_column]
        if len(set(claimed)) != len(claimed):
            raise ValueError(f"x/z/y columns of case {self.name!r} must be disjoint")


def builtin_specs() -> tuple:
    """The three shipped case studies, in presentation order."""
    return (
        CaseStudySpec(
            name="capm-vs-ff3",
            x_columns=("smb", "hml"),
            z_columns=(CONST_COLUMN, "mkt_excess"),
            y_column="asset_excess",
        ),
        CaseStudySpec(
            name="ff3-vs-ff5",
            x_columns=("rmw", "cma"),
            z_columns=(CONST_COLUMN, "mkt_excess", "smb", "hml"),
            y_column="asset_excess",
        ),
        CaseStudySpec(
            name="hml-redundancy",
            x_columns=("hml",),
            z_columns=(CONST_COLUMN, "mkt_excess", "smb", "rmw", "cma"),
            y_column="asset_excess",
        ),
    )


def _column_block(panel: FactorPanel, names) -> np.ndarray:
    return np.column_stack([panel.column(name) for name in names])


def assemble_sample(panel: FactorPanel, spec: CaseStudySpec) -> Sample:
    """The (X, Y, Z) blocks a case study feeds to the test."""
    return Sample(
        x=_column_block(panel, spec.x_columns),
        y=panel.column(spec.y_column).reshape(-1, 1),
        z=_column_block(panel, spec.z_columns),
    )


def run_case(
    panel: FactorPanel,
    spec: CaseStudySpec,
    plan: PermutationPlan,
    alpha: float = 0.1,
) -> TestReport:
    """Run one case study; the report carries the case name.

    ``alpha`` defaults to 0.1, the level at which the case-study
    conclusions are customarily stated.
    """
    sample = assemble_sample(panel, spec)
    report = linmdd_test(sample, plan, alpha=alpha, intercept=False)
    return replace(report, name=spec.name)
