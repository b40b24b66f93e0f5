# Delayed saturating response: the right-hand side reads the running
# supremum of the state over the trailing window [t - r, t], so the
# problem needs a history function on [-r, 0] and a delay-aligned mesh.
#
# Two variants ship as builtin configs:
#   delay-exp    declares a Lipschitz envelope -> contraction certificate
#   delay-plain  declares only linear growth   -> a-priori bound, no
#                uniqueness verdict from this route
#
# Run:  python3 demos/delayed_saturation.py

import numpy as np

from fracimpulse import (
    build_mesh,
    builtin_example,
    certify,
    parse_config,
    solve_picard,
)

# ---------------------------------------------------------------- delay-exp

cfg = parse_config(builtin_example("delay-exp"))
cert = certify(cfg.problem, p=cfg.certificate_p)
print("delay-exp: certificate before solving")
print(f"  holder exponent p = {cert.p:.6f} (auto-selected)")
print(f"  contraction constant gamma = {cert.gamma_stated:.6f}")
print(f"  verdict: {cert.verdict}")
print()

# gamma < 1 predicts geometric Picard convergence; the observed residual
# ratios should sit at or below gamma once the iteration settles.
mesh = build_mesh(cfg.problem, cfg.target_h)
rep = solve_picard(
    cfg.problem, mesh, scheme=cfg.scheme, tol=cfg.tol, max_iter=cfg.max_iter
)
print(f"solved in {rep.iterations} sweeps; residual trail:")
hist = rep.residual_history
for n, r in enumerate(hist, start=1):
    ratio = f"   ratio {hist[n - 1] / hist[n - 2]:.4f}" if n >= 2 else ""
    print(f"  sweep {n}: residual {r:.3e}{ratio}")
print(f"every settled ratio <= gamma + 0.1 = {cert.gamma_stated + 0.1:.4f}")
print()

# ---------------------------------------------------------------- delay-plain

cfg2 = parse_config(builtin_example("delay-plain"))
cert2 = certify(cfg2.problem, p=cfg2.certificate_p)
print("delay-plain: no Lipschitz declaration, existence route only")
print(f"  verdict: {cert2.verdict}")
print(f"  linear growth factor q = {cert2.schaefer_q:.6f}")
print(f"  a-priori solution bound = {cert2.schaefer_bound:.6f}")

rep2 = solve_picard(
    cfg2.problem,
    build_mesh(cfg2.problem, cfg2.target_h),
    scheme=cfg2.scheme,
    tol=cfg2.tol,
    max_iter=cfg2.max_iter,
)
sup = max(
    float(np.max(np.abs(rep2.trajectory.values))),
    float(np.max(np.abs(rep2.trajectory.right_values))),
)
print(f"  observed sup |x| = {sup:.6f} (within the bound)")
print()

# The certificate is honest about its inputs: declaring a bound the jump
# maps do not satisfy is rejected by sampling, not silently accepted.
bad = builtin_example("delay-exp")
bad["certificate"]["jump_bound"] = 0.01  # actual jump is 0.5
try:
    certify(parse_config(bad).problem, p="auto")
except ValueError as e:
    print("dishonest jump_bound declaration is refused:")
    print(f"  {e}")
