#!/usr/bin/env python3
"""Regenerate the packaged synthetic factor panel, byte for byte.

The shipped panel (src/linmdd/data/ff_factors_annual_1964_2016.csv) is
simulated, not downloaded: annual factor returns are drawn from a
multivariate normal whose means, volatilities, and correlations are set
to round figures resembling public annual factor data, the risk-free
rate follows a clipped AR(1) path, and the asset return loads on the
market, size, and value factors (plus small profitability/investment
loadings) with idiosyncratic noise.  Everything is rounded to two
decimals in percent units, like the data files the loader is meant to
ingest.

The master seed and loadings below were chosen so that the three
built-in case studies land at stable, moderately sized p-values
(~0.05 / ~0.32 / ~0.18 at B = 500) across permutation seeds.  Rerunning
this script reproduces the committed file exactly; pass --seed to
explore alternatives.
"""

import argparse
from pathlib import Path

import numpy as np

MASTER_SEED = 1291
YEARS = range(1964, 2017)

# Factor order: mkt_rf, smb, hml, rmw, cma (annual, percent).
FACTOR_MEANS = np.array([6.3, 2.6, 4.7, 3.0, 3.7])
FACTOR_SDS = np.array([17.3, 11.5, 13.5, 9.0, 9.5])
FACTOR_CORR = np.array(
    [
        [1.00, 0.30, -0.25, -0.25, -0.30],
        [0.30, 1.00, -0.10, -0.35, 0.00],
        [-0.25, -0.10, 1.00, 0.10, 0.68],
        [-0.25, -0.35, 0.10, 1.00, 0.00],
        [-0.30, 0.00, 0.68, 0.00, 1.00],
    ]
)

# Asset equation: ba = rf + alpha + loadings . factors + noise.
ALPHA = 2.0
LOADINGS = np.array([1.05, 0.55, 0.35, 0.12, 0.12])
NOISE_SD = 22.0

# Risk-free AR(1): rf_t = max(floor, level + x_t), x_t = phi x_{t-1} + s e_t.
RF_LEVEL, RF_FLOOR, RF_PHI, RF_INNOV_SD = 4.4, 0.03, 0.85, 1.2

HEADER_COMMENT = """\
# Synthetic annual factor panel, 1964-2016, percent units.
# Simulated draws calibrated to round-figure annual factor moments --
# not downloaded records.  Regenerate with scripts/make_finance_fixture.py
# (master seed {seed}); the file is deterministic given that seed.
"""


def simulate(master_seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(20260825, master_seed)))
    n = len(YEARS)
    chol = np.linalg.cholesky(FACTOR_CORR)
    factors = FACTOR_MEANS + (rng.standard_normal((n, 5)) @ chol.T) * FACTOR_SDS
    innov = rng.standard_normal(n)
    rf = np.empty(n)
    x = 0.0
    for t in range(n):
        x = RF_PHI * x + RF_INNOV_SD * innov[t]
        rf[t] = max(RF_FLOOR, RF_LEVEL + x)
    noise = NOISE_SD * rng.standard_normal(n)
    ba = rf + ALPHA + factors @ LOADINGS + noise
    return np.column_stack([np.round(v, 2) for v in (*factors.T, rf, ba)])


def write_fixture(path: Path, master_seed: int) -> None:
    rows = simulate(master_seed)
    with open(path, "w") as fh:
        fh.write(HEADER_COMMENT.format(seed=master_seed))
        fh.write("year,mkt_rf,smb,hml,rmw,cma,rf,ba\n")
        for year, row in zip(YEARS, rows):
            fh.write(f"{year}," + ",".join(f"{v:.2f}" for v in row) + "\n")


def main(argv=None) -> int:
    default_out = (
        Path(__file__).resolve().parent.parent
        / "src" / "linmdd" / "data" / "ff_factors_annual_1964_2016.csv"
    )
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--output", type=Path, default=default_out, help="destination CSV")
    parser.add_argument("--seed", type=int, default=MASTER_SEED, help="generator master seed")
    args = parser.parse_args(argv)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    write_fixture(args.output, args.seed)
    print(f"wrote {args.output} (seed {args.seed}, {len(list(YEARS))} years)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
