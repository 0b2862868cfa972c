#!/usr/bin/env python3
"""Heat kernels on the chamber and the battery of independent checks.

Builds the rank context (normalization constant from the Gaussian moment),
evaluates the kernel, and confirms it against the signed-image expansion, the
spectral inversion integral, unit mass, the semigroup property, and the
finite-difference heat-equation residual.
"""

import math

import numpy as np

from weylheat import (
    heat_envelope,
    heat_flat,
    images_oracle,
    inverse_fourier_oracle,
    make_heat_context,
    mms_constant,
    pde_residual,
    semigroup_check,
)
from weylheat.heat import _mass_with_unit_constant

n = 1
ctx = make_heat_context(n)
print(f"rank {n}: d={ctx.d}, gamma={ctx.gamma}")
print(f"normalization constant (chamber Gaussian moment) = {ctx.c_k:.12f}")
print(f"full-space Gaussian moment = {mms_constant(n, chamber=False):.12f}  (= 4 pi at rank 1)")
print()

t, x, y = 0.7, np.array([1.3, 0.0]), np.array([0.9, -0.2])
p = heat_flat(ctx, t, x, y)
img = images_oracle(ctx, t, x, y)
fou = inverse_fourier_oracle(ctx, t, x, y)
print(f"p_t(X,Y)  spherical route : log p = {p.log_value:.12f}")
print(f"          signed images   : log p = {img.log_value:.12f}")
print(f"          spectral inverse: log p = {fou.log_value:.12f}")
print(f"          envelope        : log   = {heat_envelope(t, x, y):.12f}")
print()

mass = math.exp(_mass_with_unit_constant(n, t, x, 28, 8)) / ctx.c_k
print(f"chamber mass of p_t(X, .) against pi^2 dY = {mass:.12f}")

defect = semigroup_check(ctx, 0.5, 0.5, [1.0, 0.0], [2.0, 0.0])
print(f"semigroup defect at t = s = 1/2            = {defect:.2e}")
print()

print("heat-equation residual (central differences, halving steps):")
for h in (0.02, 0.01, 0.005):
    r = pde_residual(ctx, t, x, y, h)
    print(f"  h = {h:5.3f}: |d_t p - Lap p| / p = {r:.3e}")
print("  (each halving divides the residual by ~4: second-order stencil,")
print("   vanishing residual in the limit)")
