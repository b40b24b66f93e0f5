r"""Product-integration weights for the fractional integral.

For mesh nodes 0 = t_0 < ... < t_N and order alpha in (0,1), row j of a
weight table discretizes

    (I^alpha g)(t_j) = (1/gamma(alpha)) int_0^{t_j} (t_j - s)^(alpha-1) g(s) ds

as sum_i w[j,i] * g(t_i).  Two schemes:

  rectangle   g frozen at each cell's left endpoint; cell [t_i, t_{i+1}]
              contributes ((t_j-t_i)^a - (t_j-t_{i+1})^a)/gamma(a+1) to
              column i.  Fully explicit (w[j,j] = 0).

  trapezoid   g replaced by its piecewise-linear interpolant; the cell
              integrals of the two hat functions against the kernel have
              closed forms in the node differences A = t_j - t_i,
              B = t_j - t_{i+1}:

                  left  = [ (A^{a+1}-B^{a+1})/(a+1) - B(A^a-B^a)/a ] / (h_i gamma(a))
                  right = [ A(A^a-B^a)/a - (A^{a+1}-B^{a+1})/(a+1) ] / (h_i gamma(a))

All weights are nonnegative (each is the integral of a nonnegative
function), rows sum to t_j^alpha / gamma(alpha+1) exactly for both
schemes, and the trapezoid rule is exact on linear integrands.  The
differences A^a - B^a are evaluated via expm1/log1p so row sums hold to
1e-12 relative even on fine meshes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exprlang import BinOp, Expr, Num, Unary, Var, evaluate
from .problem import MAX_MESH_NODES, Mesh
from .special import gamma

__all__ = [
    "SCHEMES",
    "WeightTable",
    "build_weights",
    "frac_integral",
    "power_integral",
    "OrderStudy",
    "convergence_order",
]

SCHEMES = ("rectangle", "trapezoid")


@dataclass(frozen=True)
class WeightTable:
    """Dense lower-triangular weights for one mesh/order/scheme triple."""

    scheme: str
    alpha: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.size)


def _pow_diff(A: np.ndarray, B: np.ndarray, expo: float) -> np.ndarray:
    """A**expo - B**expo for A >= B >= 0, stable when A is close to B."""
    out = np.empty_like(A)
    zero = B <= 0.0
    out[zero] = A[zero] ** expo
    nz = ~zero
    if np.any(nz):
        ratio = np.log1p((B[nz] - A[nz]) / A[nz])
        out[nz] = -(A[nz] ** expo) * np.expm1(expo * ratio)
    return out


def build_weights(mesh: Mesh, alpha: float, scheme: str) -> WeightTable:
    """Weight table for all rows of the mesh at once.

    The table is dense (N+1)^2; meshes are capped at 2^15 nodes.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    t = np.asarray(mesh.nodes, dtype=float)
    n = t.size
    if n > MAX_MESH_NODES:
        raise ValueError(f"mesh has {n} nodes, over the {MAX_MESH_NODES} cap")

    W = np.zeros((n, n))
    ga1 = gamma(alpha + 1.0)
    ga = gamma(alpha)
    for j in range(1, n):
        A = t[j] - t[:j]
        B = t[j] - t[1 : j + 1]
        d_a = _pow_diff(A, B, alpha)
        if scheme == "rectangle":
            W[j, :j] = d_a / ga1
        else:
            h = t[1 : j + 1] - t[:j]
            P = _pow_diff(A, B, alpha + 1.0) / (alpha + 1.0)
            W[j, :j] += (P - B * d_a / alpha) / h / ga
            W[j, 1 : j + 1] += (A * d_a / alpha - P) / h / ga
    return WeightTable(scheme=scheme, alpha=alpha, nodes=t, weights=W)


def frac_integral(table: WeightTable, samples: np.ndarray, j: int | None = None):
    """Apply the table to integrand samples at the mesh nodes.

    samples has shape (N+1,) or (N+1, d).  With j given, returns the
    value at node j only; otherwise the values at every node.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != table.n_nodes:
        raise ValueError(
            f"expected {table.n_nodes} samples, got {samples.shape[0]}"
        )
    if j is None:
        return table.weights @ samples
    j = int(j)
    if not 0 <= j < table.n_nodes:
        raise ValueError(f"node index {j} out of range")
    return table.weights[j, : j + 1] @ samples[: j + 1]


def power_integral(alpha: float, beta: float, t: float) -> float:
    """Closed form I^alpha[s^beta](t) = gamma(beta+1)/gamma(beta+1+alpha) t^(beta+alpha)."""
    if beta <= -1.0:
        raise ValueError(f"power rule needs beta > -1, got {beta!r}")
    return gamma(beta + 1.0) / gamma(beta + 1.0 + alpha) * t ** (beta + alpha)


def _monomial_of(expr: Expr) -> tuple[float, float] | None:
    """Match c, c*t^b, t^b, t, -t^b ... returning (coefficient, power)."""
    if isinstance(expr, Num):
        return expr.value, 0.0
    if isinstance(expr, Var) and expr.name == "t":
        return 1.0, 1.0
    if isinstance(expr, Unary) and expr.op == "-":
        inner = _monomial_of(expr.operand)
        if inner is not None:
            return -inner[0], inner[1]
        return None
    if isinstance(expr, BinOp):
        if expr.op == "^":
            base = _monomial_of(expr.left)
            if base is not None and base == (1.0, 1.0) and isinstance(expr.right, Num):
                return 1.0, expr.right.value
            return None
        if expr.op == "*":
            lhs = _monomial_of(expr.left)
            rhs = _monomial_of(expr.right)
            if lhs is not None and rhs is not None:
                if lhs[1] == 0.0 or rhs[1] == 0.0:
                    return lhs[0] * rhs[0], lhs[1] + rhs[1]
            return None
    return None


@dataclass(frozen=True)
class OrderStudy:
    """Result of an empirical refinement study."""

    steps: tuple[float, ...]
    errors: tuple[float, ...]
    order: float | None
    exact: bool


def convergence_order(
    scheme: str,
    alpha: float,
    g: Expr,
    t: float,
    h_list,
) -> OrderStudy:
    """Empirical order of (I^alpha g)(t) under mesh refinement.

    g is an expression in the single variable t.  Monomials c*t^beta use
    the closed-form power rule as reference; anything else is compared
    against a trapezoid computation at h_ref = min(h_list)/8.  When all
    errors sit at roundoff the study reports exact=True and no slope.
    """
    t = float(t)
    if not t > 0.0:
        raise ValueError("t must be positive")
    hs = sorted(float(h) for h in h_list)
    if len(hs) < 3:
        raise ValueError("need at least 3 step sizes")
    if hs[0] <= 0.0:
        raise ValueError("step sizes must be positive")

    def value_at(h: float, use_scheme: str) -> tuple[float, float]:
        n = max(1, round(t / h))
        nodes = np.linspace(0.0, t, n + 1)
        mesh = Mesh(nodes=nodes, boundary_idx=(0, n), seg_steps=(t / n,))
        table = build_weights(mesh, alpha, use_scheme)
        samples = np.array([evaluate(g, {"t": float(s)}) for s in nodes])
        return float(frac_integral(table, samples, n)), t / n

    mono = _monomial_of(g)
    if mono is not None:
        coef, beta = mono
        reference = coef * power_integral(alpha, beta, t)
    else:
        reference, _ = value_at(hs[0] / 8.0, "trapezoid")

    errors, actual = [], []
    for h in hs:
        v, h_used = value_at(h, scheme)
        errors.append(abs(v - reference))
        actual.append(h_used)

    scale = max(1.0, abs(reference))
    if all(e <= 1e-12 * scale for e in errors):
        return OrderStudy(tuple(actual), tuple(errors), None, True)
    floored = [max(e, 1e-16 * scale) for e in errors]
    slope = float(np.polyfit(np.log(actual), np.log(floored), 1)[0])
    return OrderStudy(tuple(actual), tuple(errors), slope, False)
