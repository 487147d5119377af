"""Conditional mean independence testing via martingale difference divergence.

The package tests H0: E(Y|X, Z) = E(Y|Z) by residualizing Y on Z with
least squares and measuring the conditional mean dependence of the
residuals on (X, Z) with the empirical martingale difference divergence,
calibrated by permuting only the X rows.  See :func:`linmdd_test` for the
main entry point, :mod:`linmdd.simulation` for the Monte Carlo harness,
and :mod:`linmdd.finance` for the factor-model case studies.
"""

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
from .kernel import (
    CenteredKind,
    CenteredMatrix,
    centered_distances,
    centered_half_squared,
    double_center,
    half_squared_distances,
    mdd,
    mdd_squared,
    mdd_squared_from_centered,
    pairwise_distances,
)
from .sample import Sample
from .regression import FittedLinearModel, Residualization, fit_ols, fit_ridge, residualize
from .inference import (
    PermutationPlan,
    TestReport,
    linmdd_test,
    mdd_test,
    partial_f_test,
    permutation_pvalue,
)
from .simulation import (
    ModelSpec,
    PowerRow,
    PowerTable,
    PROFILES,
    catalog,
    emit_table,
    generate,
    model_specs,
    read_table,
    run_grid,
)
from .finance import (
    CaseStudySpec,
    FactorPanel,
    PanelSchema,
    builtin_panel_path,
    builtin_specs,
    load_builtin_panel,
    load_panel,
    run_case,
    save_panel,
)

__version__ = "0.1.0"

__all__ = [
    "Sample",
    "CenteredKind",
    "CenteredMatrix",
    "pairwise_distances",
    "half_squared_distances",
    "double_center",
    "centered_distances",
    "centered_half_squared",
    "mdd_squared",
    "mdd_squared_from_centered",
    "mdd",
    "FittedLinearModel",
    "Residualization",
    "fit_ols",
    "fit_ridge",
    "residualize",
    "PermutationPlan",
    "TestReport",
    "permutation_pvalue",
    "linmdd_test",
    "mdd_test",
    "partial_f_test",
    "ModelSpec",
    "model_specs",
    "catalog",
    "generate",
    "PROFILES",
    "PowerRow",
    "PowerTable",
    "run_grid",
    "emit_table",
    "read_table",
    "PanelSchema",
    "FactorPanel",
    "CaseStudySpec",
    "load_panel",
    "save_panel",
    "builtin_specs",
    "builtin_panel_path",
    "load_builtin_panel",
    "run_case",
    "DimensionMismatch",
    "NonFiniteData",
    "RankDeficient",
    "UnsupportedResponseDim",
    "InvalidPlan",
    "ConsistencyError",
    "MissingColumn",
    "MissingValue",
    "NonNumericCell",
    "InputFormatError",
    "__version__",
]
