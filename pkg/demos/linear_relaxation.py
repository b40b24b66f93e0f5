# Fractional linear relaxation: solve the Caputo problem D^alpha x = -x,
# x(0) = 1 on [0, 1] and compare against the analytic solution
# x(t) = E_alpha(-t^alpha), the one-parameter Mittag-Leffler function.
#
# Run:  python3 demos/linear_relaxation.py

import numpy as np

from fracimpulse import (
    ProblemSpec,
    RhsSpec,
    build_mesh,
    mittag_leffler,
    solve_picard,
)


def relaxation(alpha):
    return ProblemSpec(
        alpha=alpha,
        T=1.0,
        rhs=RhsSpec(kind="plain", f=lambda t, x: -x),
        x0=np.array([1.0]),
    )


print("linear relaxation D^alpha x = -x, x(0) = 1, T = 1")
print()

# The exact endpoint value decreases slowly for small alpha: memory of the
# initial state fades algebraically, not exponentially.
for alpha in (0.3, 0.5, 0.8):
    exact = mittag_leffler(alpha, -1.0)
    print(f"alpha = {alpha}:  exact x(1) = E_alpha(-1) = {exact:.12f}")
print()

# Refine the mesh and watch the trapezoid scheme close in on the oracle.
print("trapezoid scheme, endpoint error under refinement (alpha = 0.5)")
spec = relaxation(0.5)
exact = mittag_leffler(0.5, -1.0)
prev = None
for k in range(4, 11):
    h = 2.0**-k
    mesh = build_mesh(spec, h)
    rep = solve_picard(spec, mesh, scheme="trapezoid")
    err = abs(rep.trajectory.values[-1, 0] - exact)
    ratio = "" if prev is None else f"   ratio {prev / err:5.2f}"
    print(f"  h = 2^-{k:<2d}  error = {err:.3e}{ratio}")
    prev = err

print()
print("rectangle scheme at h = 2^-10 for comparison")
for alpha in (0.3, 0.5, 0.8):
    spec = relaxation(alpha)
    mesh = build_mesh(spec, 2.0**-10)
    rect = solve_picard(spec, mesh, scheme="rectangle")
    trap = solve_picard(spec, mesh, scheme="trapezoid")
    exact = mittag_leffler(alpha, -1.0)
    print(
        f"  alpha = {alpha}:  rectangle error = "
        f"{abs(rect.trajectory.values[-1, 0] - exact):.3e}   "
        f"trapezoid error = {abs(trap.trajectory.values[-1, 0] - exact):.3e}"
    )

print()
print("the oracle itself is checked against an independent identity:")
import math

lhs = mittag_leffler(0.5, -1.0)
rhs = math.e * math.erfc(1.0)
print(f"  E_0.5(-1) = {lhs:.15f}")
print(f"  e*erfc(1) = {rhs:.15f}")
print(f"  difference {abs(lhs - rhs):.2e}")
