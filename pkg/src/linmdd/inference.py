"""Permutation tests for conditional mean independence.

The main entry point is :func:`linmdd_test`: residualize y on z by least
squares, then measure the conditional mean dependence of the residuals
vhat on the joint block u = (x, z) and compare against permutation
replicates in which only the x rows inside u are rearranged.  y, z, and
vhat stay fixed across replicates, so the regression is fitted exactly
once.

Permutation streams
-------------------
Reproducibility across thread counts comes from a counter-based generator
(Philox) with one independent stream per replicate: replicate ``b``
(1-based, as in the p-value sum) draws its permutation from the stream
keyed ``(seed, b)``.  The same (seed, n) therefore always produces the
same permutation sequence, no matter how replicates are scheduled, and
raising the replicate count extends the sequence without changing its
prefix.

The empirical p-value is the fraction of replicate statistics that are
greater than or equal to the observed one (ties count).  A
``corrected=True`` flag switches to the (1 + count) / (1 + B) variant;
the uncorrected form is the default.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import f as f_distribution

from .errors import DimensionMismatch, InvalidPlan, UnsupportedResponseDim
from .kernel import CenteredKind, CenteredMatrix, _center_values, _clamp_nonnegative, _reduce_product, as_block
from .regression import augment_intercept, fit_ols, residualize
from .sample import Sample

__all__ = [
    "PermutationPlan",
    "TestReport",
    "permutation_pvalue",
    "linmdd_test",
    "mdd_test",
    "partial_f_test",
    "DECISION_REJECT",
    "DECISION_FAIL_TO_REJECT",
]

DECISION_REJECT = "reject"
DECISION_FAIL_TO_REJECT = "fail_to_reject"

_UINT64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class PermutationPlan:
    """How many permutation replicates to draw and from which seed.

    ``num_permutations`` is the B of the empirical p-value; ``seed`` is a
    64-bit integer.  Replicate b uses the Philox stream keyed (seed, b).
    """

    num_permutations: int
    seed: int

    def __post_init__(self):
        if self.num_permutations < 1:
            raise InvalidPlan(
                f"need at least one permutation replicate, got {self.num_permutations}"
            )
        if not 0 <= int(self.seed) <= _UINT64_MASK:
            raise InvalidPlan(f"seed must fit in 64 unsigned bits, got {self.seed}")

    def replicate_rng(self, b: int) -> np.random.Generator:
        """Generator for replicate b (1-based); independent across b."""
        if b < 1:
            raise InvalidPlan(f"replicate index must be >= 1, got {b}")
        key = np.array([self.seed, b], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def permutation(self, b: int, n: int) -> np.ndarray:
        """The permutation of range(n) used by replicate b."""
        return self.replicate_rng(b).permutation(n)

    def permutations(self, n: int) -> Iterator[np.ndarray]:
        for b in range(1, self.num_permutations + 1):
            yield self.permutation(b, n)


@dataclass(frozen=True)
class TestReport:
    """Observed statistic, permutation replicates, and the verdict.

    ``replicates`` is empty for analytic tests (the partial F baseline).
    ``decision`` is "reject" exactly when p_value < alpha.
    """

    test: str
    statistic: float
    replicates: tuple[float, ...]
    p_value: float
    num_permutations: int
    seed: int | None
    alpha: float
    decision: str
    name: str | None = None

    def with_name(self, name: str) -> "TestReport":
        return replace(self, name=name)

    def to_dict(self, include_replicates: bool = False) -> dict:
        out = {
            "name": self.name if self.name is not None else self.test,
            "test": self.test,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "num_permutations": self.num_permutations,
            "seed": self.seed,
            "alpha": self.alpha,
            "decision": self.decision,
        }
        if include_replicates:
            out["replicates"] = list(self.replicates)
        return out


def _decide(p_value: float, alpha: float) -> str:
    return DECISION_REJECT if p_value < alpha else DECISION_FAIL_TO_REJECT


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def permutation_pvalue(
    observed: float, replicates: Sequence[float], corrected: bool = False
) -> float:
    """Fraction of replicates >= observed (ties count as >=).

    With ``corrected=True``, returns (1 + count) / (1 + B) instead; the
    plain count / B form is the default.
    """
    arr = np.asarray(replicates, dtype=np.float64)
    if arr.size == 0:
        raise InvalidPlan("empty replicate list: no permutations were run")
    count = int(np.count_nonzero(arr >= observed))
    if corrected:
        return (1 + count) / (1 + arr.size)
    return count / arr.size


def _run_replicates(
    plan: PermutationPlan,
    n: int,
    statistic_of: Callable[[np.ndarray], float],
    threads: int,
) -> tuple[float, ...]:
    indices = range(1, plan.num_permutations + 1)
    if threads > 1:
        # Streams are per-replicate, so scheduling cannot change any draw;
        # map() preserves submission order for deterministic aggregation.
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(lambda b: statistic_of(plan.permutation(b, n)), indices))
    else:
        stats = [statistic_of(plan.permutation(b, n)) for b in indices]
    return tuple(stats)


class _JointBlockEngine:
    """Permutation statistics for mdd_squared(vhat | (x[perm], z)).

    The response-side centered matrix is built once from the residuals.
    The u distances are rebuilt every replicate from two precomputed
    squared-distance blocks: permuting x rows relocates the x block
    entries while the z block stays in place, so
    |u*_i - u*_j| = sqrt(dx2[perm_i, perm_j] + dz2[i, j]).
    """

    def __init__(self, x: np.ndarray, z_design: np.ndarray, vhat: np.ndarray):
        self._dx2 = squareform(pdist(x, "sqeuclidean"))
        self._dz2 = squareform(pdist(z_design, "sqeuclidean"))
        self._b_values = _center_values(
            squareform(0.5 * pdist(vhat, "sqeuclidean"))
        )
        self.n = x.shape[0]

    @property
    def response_matrix(self) -> CenteredMatrix:
        return CenteredMatrix(self._b_values.copy(), CenteredKind.HALF_SQUARED)

    def statistic(self, perm: np.ndarray) -> float:
        dist = np.sqrt(self._dx2[np.ix_(perm, perm)] + self._dz2)
        value, scale = _reduce_product(_center_values(dist), self._b_values)
        return _clamp_nonnegative(value, scale)

    def observed(self) -> float:
        return self.statistic(np.arange(self.n))


def linmdd_test(
    sample: Sample,
    plan: PermutationPlan,
    alpha: float = 0.05,
    intercept: bool = False,
    method: str = "ols",
    ridge_penalty: float | None = None,
    corrected: bool = False,
    threads: int = 1,
) -> TestReport:
    """Test whether x adds anything to the conditional mean of y beyond z.

    Fits y on z once (optionally with an appended intercept column),
    freezes the residuals, and compares the observed conditional mean
    dependence of the residuals on (x, z) against replicates in which
    only the x rows are permuted.

    Returns a :class:`TestReport`; the decision is taken at ``alpha``.
    """
    alpha = _check_alpha(alpha)
    if sample.n < 4:
        raise DimensionMismatch(f"need n >= 4 observations, got {sample.n}")
    res = residualize(sample, intercept=intercept, method=method, ridge_penalty=ridge_penalty)
    engine = _JointBlockEngine(sample.x, res.z_design, res.vhat)
    observed = engine.observed()
    replicates = _run_replicates(plan, sample.n, engine.statistic, threads)
    p_value = permutation_pvalue(observed, replicates, corrected=corrected)
    return TestReport(
        test="linmdd",
        statistic=observed,
        replicates=replicates,
        p_value=p_value,
        num_permutations=plan.num_permutations,
        seed=plan.seed,
        alpha=alpha,
        decision=_decide(p_value, alpha),
    )


def mdd_test(
    x,
    y,
    plan: PermutationPlan,
    alpha: float = 0.05,
    corrected: bool = False,
    threads: int = 1,
) -> TestReport:
    """Unconditional test of whether x contributes to the mean of y.

    The observed statistic is mdd_squared(y | x); replicates permute the
    x rows.  Because x is the whole explanatory block here, a permutation
    simply relocates entries of the precomputed distance matrix.
    """
    alpha = _check_alpha(alpha)
    xa = as_block(x, "x", min_rows=4)
    ya = as_block(y, "y", min_rows=4)
    if xa.shape[0] != ya.shape[0]:
        raise DimensionMismatch(f"x and y must share n: {xa.shape[0]} != {ya.shape[0]}")
    n = xa.shape[0]
    dx = squareform(pdist(xa))
    b_values = _center_values(squareform(0.5 * pdist(ya, "sqeuclidean")))

    def statistic_of(perm: np.ndarray) -> float:
        value, scale = _reduce_product(
            _center_values(dx[np.ix_(perm, perm)]), b_values
        )
        return _clamp_nonnegative(value, scale)

    observed = statistic_of(np.arange(n))
    replicates = _run_replicates(plan, n, statistic_of, threads)
    p_value = permutation_pvalue(observed, replicates, corrected=corrected)
    return TestReport(
        test="mdd",
        statistic=observed,
        replicates=replicates,
        p_value=p_value,
        num_permutations=plan.num_permutations,
        seed=plan.seed,
        alpha=alpha,
        decision=_decide(p_value, alpha),
    )


def partial_f_test(
    sample: Sample, alpha: float = 0.05, intercept: bool = False
) -> TestReport:
    """Classical nested-regression F test, single-response only.

    Compares the residual sum of squares of y ~ z against y ~ (x, z) and
    refers the F ratio to its analytic null distribution.  Serves as the
    linear baseline next to the permutation tests.
    """
    alpha = _check_alpha(alpha)
    if sample.q != 1:
        raise UnsupportedResponseDim(
            f"the partial F test handles a single response column, got q={sample.q}"
        )
    z_design = augment_intercept(sample.z, intercept)
    n, p = sample.n, sample.p
    r_design = z_design.shape[1]
    dof = n - p - r_design
    if dof < 1:
        raise DimensionMismatch(
            f"need n > p + r for the F test (n={n}, p={p}, r={r_design})"
        )
    full = fit_ols(sample.y, np.hstack([sample.x, z_design]))
    reduced = fit_ols(sample.y, z_design)
    rss_full = float(np.sum(full.residuals**2))
    rss_reduced = float(np.sum(reduced.residuals**2))
    excess = max(rss_reduced - rss_full, 0.0)
    if rss_full == 0.0:
        statistic = 0.0 if excess == 0.0 else float("inf")
        p_value = 1.0 if excess == 0.0 else 0.0
    else:
        statistic = (excess / p) / (rss_full / dof)
        p_value = float(f_distribution.sf(statistic, p, dof))
    return TestReport(
        test="partial-f",
        statistic=statistic,
        replicates=(),
        p_value=p_value,
        num_permutations=0,
        seed=None,
        alpha=alpha,
        decision=_decide(p_value, alpha),
    )
