#!/usr/bin/env python3
"""Z_N(t) for V0 = -x^4/4 from the Pfaffian formula, with the N = 2 direct
integral and a Monte Carlo estimate alongside.

    python3 scripts/theorem1_demo.py [--samples 200000]
"""
import argparse
import time

from kontsevich_bkp.pvquad import KernelSpec, mc_z_estimate, z_direct, z_theorem1

ap = argparse.ArgumentParser()
ap.add_argument("--samples", type=int, default=200_000)
ap.add_argument("--seed", type=int, default=1)
a = ap.parse_args()

cases = [
    KernelSpec(2, (1.0, 2.0)),
    KernelSpec(2, (1.0, 2.0), {4: -0.25}),
    KernelSpec(2, (1.0, 2.0), {4: -0.25}, {1: 0.1}),
    KernelSpec(4, (1.0, 2.0, 3.0, 4.0), {4: -0.25}),
]
for s in cases:
    t0 = time.perf_counter()
    r = z_theorem1(s)
    line = f"N={s.N} lambda={s.lambdas} V0={s.v0} t={s.t}\n  Pfaffian formula  {r.value:.15f}  ({time.perf_counter() - t0:.1f}s)"
    if s.N == 2:
        d, _ = z_direct(s)
        line += f"\n  direct integral   {d:.15f}  rel diff {abs(r.value - d) / d:.1e}"
    if s.has_potential:
        m, se = mc_z_estimate(s, a.samples, a.seed)
        line += f"\n  Monte Carlo       {m:.6f} +- {se:.1e}"
    print(line)
