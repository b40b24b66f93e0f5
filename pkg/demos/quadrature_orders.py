# Product-integration quadrature for the fractional integral
# (I^alpha g)(t) = 1/Gamma(alpha) * integral of (t - s)^(alpha-1) g(s) ds.
# The kernel is integrated exactly against piecewise-constant (rectangle)
# or piecewise-linear (trapezoid) interpolants of g, so the weakly
# singular factor never meets a generic quadrature rule.
#
# Run:  python3 demos/quadrature_orders.py

import numpy as np

from fracimpulse import (
    Mesh,
    build_weights,
    convergence_order,
    frac_integral,
    gamma,
    power_integral,
)
from fracimpulse.exprlang import parse

alpha = 0.5
n = 64
nodes = np.linspace(0.0, 1.0, n + 1)
mesh = Mesh(nodes=nodes, boundary_idx=(0, n), seg_steps=(1.0 / n,))

# Constants are integrated exactly by construction: the weight rows sum
# to t_j^alpha / Gamma(alpha + 1) no matter the scheme.
print("row sums vs t^alpha/Gamma(alpha+1), worst node error")
for scheme in ("rectangle", "trapezoid"):
    table = build_weights(mesh, alpha, scheme)
    got = frac_integral(table, np.ones(n + 1))
    ref = nodes**alpha / gamma(alpha + 1.0)
    print(f"  {scheme:9s}: {np.max(np.abs(got - ref)):.2e}")
print()

# The trapezoid interpolant is exact on linear integrands as well.
table = build_weights(mesh, alpha, "trapezoid")
got = frac_integral(table, nodes)
ref = np.array([power_integral(alpha, 1.0, t) if t > 0 else 0.0 for t in nodes])
print(f"trapezoid on g(s) = s, worst node error: {np.max(np.abs(got - ref)):.2e}")
print()

# Empirical orders on non-trivial integrands, measured at t = 1 against
# the power-rule closed form Gamma(beta+1)/Gamma(beta+1+alpha) * t^(beta+alpha).
hs = [2.0**-k for k in range(5, 11)]
for scheme, expr in (("rectangle", "t"), ("trapezoid", "t^2")):
    study = convergence_order(scheme, alpha, parse(expr), 1.0, hs)
    print(f"{scheme} on g(s) = {expr}")
    for h, e in zip(study.steps, study.errors):
        print(f"  h = {h:.6f}   error = {e:.3e}")
    print(f"  estimated order {study.order:.3f}")
    print()

# A smooth non-monomial needs a reference computed on a finer grid; the
# study handles that internally.
study = convergence_order("trapezoid", alpha, parse("exp(-t)"), 1.0, hs)
print(f"trapezoid on g(s) = exp(-s): estimated order {study.order:.3f}")
