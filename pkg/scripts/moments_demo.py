#!/usr/bin/env python3
"""Print exact Gaussian moments, their cumulants and the BKP residuals for a spectrum.

    python3 scripts/moments_demo.py 1 2 3/2
"""
import sys

from kontsevich_bkp.gaussmoments import SpectralData, cumulants, moments_up_to
from kontsevich_bkp.hirota import bkp_equation_residuals, tau_from_moments

lam = SpectralData(tuple(sys.argv[1:]) or ("1", "2"))
table = moments_up_to(lam, 6)
print(f"Lambda = diag{tuple(str(v) for v in lam.lambdas)}")
print(f"{'exponents':<22}{'moment':>24}{'cumulant':>24}")
for exps in sorted(table, key=lambda e: (sum(e), e)):
    if table[exps]:
        print(f"{str(exps):<22}{str(table[exps]):>24}{str(cumulants(table, exps)):>24}")

res = bkp_equation_residuals(tau_from_moments(lam, cutoff=8))
print("BKP residuals:", {k: str(v) for k, v in res.items()})
