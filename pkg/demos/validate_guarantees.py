"""Monte-Carlo validation of the probabilistic guarantees, desk scale.

Runs reduced-size versions of the three validation checks (the full-size
versions live in tests/test_acceptance.py):

* oracle probability: the excess risk of the trained estimator stays below
  approx_error + epsilon with the advertised frequency, after calibrating
  the threshold constant on an independent split;
* variance bound: second moments of loss increments are dominated by the
  closed-form constant times their means;
* calibration: excess squared risk is dominated by the calibration factor
  times excess power-loss risk.
"""

import numpy as np

from kernelrisk import (
    Box,
    DataModel,
    Kernel,
    KernelExpansion,
    UniformNoise,
    calibration_check,
    fit_covering_exponent,
    oracle_probability_check,
    variance_bound_check,
)
from kernelrisk.validate import discrete_cost_gap_check

box = Box((0.0,), (1.0,))
kernel = Kernel("matern", box, sobolev_order=1.0, length_scale=0.25)
centers = np.linspace(0.1, 0.9, 5).reshape(-1, 1)
pattern = np.array([0.8, -0.5, 0.9, -0.4, 0.6])
raw = KernelExpansion(kernel, centers, pattern)
f_star = KernelExpansion(kernel, centers, pattern * (0.5 / raw.rkhs_norm()))
model = DataModel(f_star, UniformNoise(0.5))

covering = fit_covering_exponent(kernel, np.linspace(0, 1, 400))
print(f"covering law: scale={covering.scale:.3f} "
      f"exponent={covering.exponent:.3f}\n")

# lam = 0.05 keeps the squared-loss threshold finite at this sample size
# (lam^(1+p/2) n > 1); more aggressive schedules make it infinite and the
# coverage event trivially true
n = 150
report = oracle_probability_check(
    model, kernel, alpha=2.0, lam=0.05, n=n, x=1.0, trials=120,
    covering=covering, master_seed=1)
print(report.summary())

report = oracle_probability_check(
    model, kernel, alpha=1.5, lam=0.05, n=n, x=1.0, trials=120,
    covering=covering, master_seed=2, mc_points=60_000)
print(report.summary())
print()

for alpha in (1.25, 1.9):
    print(variance_bound_check(model, alpha, n_functions=8,
                               mc_points=50_000, master_seed=3).summary())
print()

for alpha in (1.5, 2.0):
    print(calibration_check(model, alpha, n_functions=8, mc_points=50_000,
                            master_seed=4).summary())
print()

print(discrete_cost_gap_check(kernel, trials=40, master_seed=5).summary())
