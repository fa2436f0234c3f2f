"""Numerically verifying the smoothness/sharpness improvement bounds.

Builds the full spectral report for the 2-D quadratic under its three
mappings, then runs the randomized theorem suites.
"""

import numpy as np

from redmap.problems import make_quad2d
from redmap.propsuite import run_suite
from redmap.spectral import Region, condition_report

spec = make_quad2d(10.0)
region = Region(center=np.zeros(1), radius=0.5, samples=32, seed=0)

for name in ["linear", "fixed", "nonlinear"]:
    report = condition_report(spec.reduced(name), region, minimiser=np.zeros(1))
    print(f"mapping {name!r}:")
    print(f"  beta_f = {report.beta_f:.4f}  beta_F (metric) = {report.beta_F_riem:.4f}  "
          f"beta_F (euclidean) = {report.beta_F_eucl:.4f}")
    print(f"  kappa_f = {report.kappa_f:.4f}  kappa_F = {report.kappa_F:.4f}")
    print(f"  epsilon = {report.epsilon:.5f}  gap = {report.delta_max:.4f}  "
          f"QZ correction hypothesis failed: {report.hypothesis_failed}")
    print(f"  bounds hold: affine={report.bound_affine_holds} "
          f"nonlinear={report.bound_nonlinear_holds} morse-bott={report.bound_mb_holds}")
    print()

print("randomized suites (50 instances each):")
for summary in run_suite(seed=11, count=50):
    print(f"  {summary.family:18s} passed={summary.passed:3d} "
          f"skipped={summary.skipped:3d} failed={summary.failed:3d}")
