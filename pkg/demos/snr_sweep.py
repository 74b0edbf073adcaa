"""
Error against signal-to-noise ratio
===================================

Average the interior and full l2 errors of every method over 20 noise draws at
several SNR levels.  Pass an output directory to also write CSV and gnuplot
files.
"""

import sys

from specreproj.config import ScenarioConfig
from specreproj.experiments import emit_plotdata, sweep_snr

cfg = ScenarioConfig(signal="exp_sin", n=128, m=9, lam=4.0, snr_db=2.0, trials=20)
records, _ = sweep_snr(cfg, [2.0, 5.0, 10.0, 20.0, 30.0], write=False)

print(f"{'method':<11}{'snr_db':>7}{'l2_full':>10}{'l2_interior':>13}")
for r in sorted(records, key=lambda r: (r.method, r.snr_db)):
    print(f"{r.method:<11}{r.snr_db:>7.1f}{r.l2_full:>10.4f}{r.l2_interior:>13.4f}")

if len(sys.argv) > 1:
    for path in emit_plotdata(records, "fig3", sys.argv[1]):
        print("wrote", path)
