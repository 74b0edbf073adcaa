"""
Sensitivity to the Gegenbauer parameter lambda
==============================================

Plain reprojection is sensitive to lambda once the data are noisy.  GBSR fits
the Fourier data directly and keeps its error nearly flat across lambda.  The
last part shows a 99.9% credible band from the GBSR posterior.
"""

import numpy as np

from specreproj.config import ScenarioConfig
from specreproj.experiments import run_scenario, sweep_lambda

cfg = ScenarioConfig(signal="cos_shift", n=48, m=9, snr_db=2.0, methods=("gegenbauer", "bsr", "gbsr"), trials=20)
records, _ = sweep_lambda(cfg, range(1, 9), write=False)

errs = {}
for r in records:
    errs.setdefault(r.method, []).append(r.l2_full)
print("mean l2 error over 20 draws, lambda = 1..8")
for method, e in errs.items():
    print(f"  {method:<10}" + " ".join(f"{v:7.3f}" for v in e) + f"   max/min {max(e) / min(e):.2f}")

# credible band at one setting
band_cfg = ScenarioConfig(signal="exp_sin", n=48, m=9, lam=4.0, inv_variance=2e-3, methods=("gbsr",))
c = run_scenario(band_cfg, write=False).curves["gbsr"]
inside = (c.lower <= c.truth) & (c.truth <= c.upper)
print(f"GBSR 99.9% band covers the truth at {inside.mean():.1%} of grid points, mean width {np.mean(c.upper - c.lower):.3f}")
