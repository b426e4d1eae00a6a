#!/usr/bin/env python3
# The scalar symbols behind the interface blocks, and the positivity of
# the determinant symbol f on the positive real axis -- the property that
# makes the transmission system uniquely solvable.

import json

import numpy as np

import bitrans as bt

print("u_1(1) =", bt.u_delta(1.0, 1.0))
print("v_1(1) =", bt.v_delta(1.0, 1.0))

f1, f2, f3, g = bt.f_components(1.0, 1.0)
print(f"f_1(1)={f1:.6f}  f_2(1)={f2:.6f}  f_3(1)={f3:.6f}  g(1)={g:.6f}")
print("identity f1*f3 - f2^2 - g =", f1 * f3 - f2**2 - g)

ctx = bt.SymbolContext(c=1.0, d=1.0, k_minus=1.0, k_plus=1.0)
print("\nf(1) =", bt.f_total(ctx, 1.0))
print("f_tilde(1) =", bt.f_tilde(ctx, 1.0))
print("f_tilde(200) =", bt.f_tilde(ctx, 200.0), "(tends to 1)")

# limits: the components go to (2, 2, 2, 0), f to 16 k+ k-
big = 1e5
print("\nlimits at z = 1e5:", bt.f_components(1.0, big), "f ->", bt.f_total(ctx, big))

print("\npositivity scans over x in [1e-6, 1e6]:")
grid = np.logspace(-6, 6, 121)
for ctx in (
    bt.SymbolContext(1.0, 1.0, 1.0, 1.0),
    bt.SymbolContext(10.0, 0.1, 1.0, 1e4),   # extreme k-ratio and aspect
    bt.SymbolContext(0.37, 1.4, 2.2, 0.9),
):
    scan = bt.positivity_scan(ctx, grid)
    print(f"  c={ctx.c:<5} d={ctx.d:<5} k-={ctx.k_minus:<6} k+={ctx.k_plus:<8} "
          f"-> {json.dumps(scan.to_dict())}")
