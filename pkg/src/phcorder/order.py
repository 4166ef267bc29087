"""Deciders for the support-function order and the convex order at finite support.

Both deciders pose a feasibility LP over kernel weights. A feasible point is
returned as a kernel; an infeasible system yields a Farkas vector, which is
turned into a separating function and checked by direct integration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .errors import MeasureError, NumericalBreakdown
from .geometry import (
    ConvexPolyhedralFunction,
    PolyhedralSupportFunction,
    integrate,
    random_support_function,
)
from .kernels import DiscreteKernel, barycentric_deviation, moment_residuals
from .measures import DEFAULT_TOL, NORMS, DiscreteMeasure, coord_scale, first_moment, mass

# kernel residual bound for accepting an LP solution as a witness
VERIFY_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class OrderVerdict:
    relation: str
    holds: bool
    witness: DiscreteKernel | PolyhedralSupportFunction | ConvexPolyhedralFunction
    gap: float | None = None
    stats: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True, eq=False)
class BarycentricCost:
    value: float
    kernel: DiscreteKernel
    norm: str
    upper_bound: bool


@dataclass(frozen=True, eq=False)
class ProbeResult:
    passed: bool
    violator: PolyhedralSupportFunction | None = None
    excess: float = 0.0
    trials_run: int = 0

    def __bool__(self) -> bool:
        return self.passed


def _same_dim(m: DiscreteMeasure, n: DiscreteMeasure) -> None:
    if m.dim != n.dim:
        raise MeasureError(f"dimension mismatch: {m.dim} vs {n.dim}")


def _kernel_columns(src_w: np.ndarray, tgt: np.ndarray, active: np.ndarray):
    """Mass-balance and moment blocks over the variables ``Q[i, j]`` (row-major)."""
    ns, nt = len(src_w), len(tgt)
    d = tgt.shape[1]
    mass_rows = np.zeros((nt, ns * nt))
    for i in range(ns):
        mass_rows[:, i * nt:(i + 1) * nt] = np.diag(np.full(nt, src_w[i]))
    mom_rows = np.zeros((len(active) * d, ns * nt))
    for r, i in enumerate(active):
        mom_rows[r * d:(r + 1) * d, i * nt:(i + 1) * nt] = tgt.T
    return mass_rows, mom_rows


def _verify_kernel(q: DiscreteKernel, m: DiscreteMeasure, n: DiscreteMeasure, tol: float) -> float:
    push = m.weights @ q.Q - n.weights
    ref = max(1.0, mass(m), mass(n))
    resid = max(
        float(np.max(np.abs(push), initial=0.0)) / ref,
        float(np.max(moment_residuals(q, m, tol), initial=0.0)),
    )
    if resid > VERIFY_TOL:
        raise NumericalBreakdown(f"kernel residual {resid:.3g} exceeds {VERIFY_TOL}")
    return resid


def _normalized(arrays: list[np.ndarray]) -> float:
    return max(float(np.max(np.abs(a), initial=0.0)) for a in arrays)


def _distinct_rows(a: np.ndarray) -> np.ndarray:
    # duplicate pieces do not change a max of affine maps
    _, first = np.unique(a, axis=0, return_index=True)
    return a[np.sort(first)]


def _stats(t0: float, pivots: int, **extra) -> dict:
    return {"pivots": int(pivots), "runtime_ms": (time.perf_counter() - t0) * 1e3, **extra}


def check_phc(m: DiscreteMeasure, n: DiscreteMeasure, tol: float = DEFAULT_TOL,
              feas_tol: float = lp.FEAS_TOL, cert_tol: float = lp.CERT_TOL) -> OrderVerdict:
    """Decide ``m <=_phc n`` and return a witness either way.

    Looks for a moment-preserving kernel ``Q >= 0`` with ``sum_i m_i Q[i, j] = n_j``
    and ``sum_j Q[i, j] y_j = x_i`` for every atom with ``m_i > tol``. The kernel
    is aligned with the atoms of ``m`` (source) and ``n`` (targets) as given.

    If none exists, the Farkas duals ``beta`` (mass rows) and ``gamma_i`` (moment
    blocks) give the support function ``f(y) = max_i <-gamma_i / m_i, y>``, which
    satisfies ``int f dm > int f dn``. The verdict's ``gap`` is that difference
    with gradients scaled to unit max-norm.
    """
    _same_dim(m, n)
    t0 = time.perf_counter()
    if mass(m) <= tol:
        return _zero_source(m, n, tol, t0, cert_tol)
    scale = max(coord_scale(m.points), coord_scale(n.points))
    at_origin = np.max(np.abs(m.points), axis=1) <= tol * scale
    if np.all(at_origin | (m.weights == 0)):
        return _point_mass_at_origin(m, n, tol, t0, cert_tol)

    active = np.flatnonzero(m.weights > tol)
    mass_rows, mom_rows = _kernel_columns(m.weights, n.points, active)
    A = np.vstack([mass_rows, mom_rows])
    b = np.concatenate([n.weights, m.points[active].ravel()])
    out = lp.feasibility(A, b, feas_tol, cert_tol)

    if isinstance(out, lp.Feasible):
        q = DiscreteKernel(m.points, n.points, out.z.reshape(len(m), len(n)), dim=m.dim)
        resid = _verify_kernel(q, m, n, tol)
        return OrderVerdict("phc", True, q, None, _stats(t0, out.pivots, residual=resid))

    y = out.farkas
    gamma = y[len(n):].reshape(len(active), m.dim)
    grads = -gamma / m.weights[active, None]
    s = _normalized([grads])
    if s == 0:
        raise NumericalBreakdown("Farkas certificate has no moment component")
    f = PolyhedralSupportFunction(_distinct_rows(grads / s))
    return _certified("phc", f, m, n, t0, out.pivots, cert_tol)


def _certified(relation, f, m, n, t0, pivots, cert_tol) -> OrderVerdict:
    gap = integrate(f, m) - integrate(f, n)
    if not gap >= cert_tol:
        raise NumericalBreakdown(f"certificate gap {gap:.3g} below cert_tol {cert_tol}")
    return OrderVerdict(relation, False, f, gap, _stats(t0, pivots))


def _zero_source(m, n, tol, t0, cert_tol) -> OrderVerdict:
    # Nothing can be transported out of the zero measure.
    if mass(n) <= tol:
        q = DiscreteKernel(m.points, n.points, np.zeros((len(m), len(n))), dim=m.dim)
        return OrderVerdict("phc", True, q, None, _stats(t0, 0))
    ba = first_moment(n)
    if np.max(np.abs(ba)) <= tol * max(1.0, mass(n)) * coord_scale(n.points):
        raise MeasureError(
            "zero source measure against a nonzero target with zero first moment: "
            "every support-function test passes but no kernel exists"
        )
    f = PolyhedralSupportFunction((-ba / np.max(np.abs(ba)))[None, :])
    return _certified("phc", f, m, n, t0, 0, cert_tol)


def _point_mass_at_origin(m, n, tol, t0, cert_tol) -> OrderVerdict:
    # mu = c delta_0: the kernel p^0 = nu / c works exactly when ba(nu) = 0.
    c = mass(m)
    ba = first_moment(n)
    if np.max(np.abs(ba), initial=0.0) <= tol * max(1.0, mass(n)) * coord_scale(n.points):
        Q = np.tile(n.weights / c, (len(m), 1))
        q = DiscreteKernel(m.points, n.points, Q, dim=m.dim)
        resid = _verify_kernel(q, m, n, tol)
        return OrderVerdict("phc", True, q, None, _stats(t0, 0, residual=resid))
    f = PolyhedralSupportFunction((-ba / np.max(np.abs(ba)))[None, :])
    return _certified("phc", f, m, n, t0, 0, cert_tol)


def check_cx(m: DiscreteMeasure, n: DiscreteMeasure, tol: float = DEFAULT_TOL,
             feas_tol: float = lp.FEAS_TOL, cert_tol: float = lp.CERT_TOL) -> OrderVerdict:
    """Decide ``m <=_cx n`` by searching for a martingale coupling.

    The coupling ``pi`` has row sums ``m_i``, column sums ``n_j`` and
    ``sum_j pi[i, j] y_j = m_i x_i``. On success the witness is the disintegrated
    kernel ``pi[i] / m_i``. Otherwise the Farkas duals ``alpha, beta, gamma`` give
    the convex function ``f(y) = max_i (<-gamma_i, y> - alpha_i)`` with
    ``int f dm > int f dn``.
    """
    _same_dim(m, n)
    ma, mb = mass(m), mass(n)
    if abs(ma - mb) > tol * max(1.0, ma, mb):
        raise MeasureError(f"convex order needs equal masses, got {ma!r} and {mb!r}")
    t0 = time.perf_counter()
    ns, nt = len(m), len(n)
    if ns == 0 or nt == 0:
        q = DiscreteKernel(m.points, n.points, np.zeros((ns, nt)), dim=m.dim)
        return OrderVerdict("cx", True, q, None, _stats(t0, 0))

    active = np.flatnonzero(m.weights > tol)
    col_rows, mom_rows = _kernel_columns(np.ones(ns), n.points, active)
    row_rows = np.kron(np.eye(ns), np.ones(nt))
    A = np.vstack([row_rows, col_rows, mom_rows])
    b = np.concatenate([m.weights, n.weights, (m.weights[active, None] * m.points[active]).ravel()])
    out = lp.feasibility(A, b, feas_tol, cert_tol)

    if isinstance(out, lp.Feasible):
        pi = out.z.reshape(ns, nt)
        safe = np.where(m.weights > 0, m.weights, 1.0)
        Q = np.where(m.weights[:, None] > 0, pi / safe[:, None], 0.0)
        q = DiscreteKernel(m.points, n.points, Q, dim=m.dim)
        resid = _verify_kernel(q, m, n, tol)
        rows = np.abs(q.row_masses() - 1.0)[m.weights > tol]
        resid = max(resid, float(np.max(rows, initial=0.0)))
        if resid > VERIFY_TOL:
            raise NumericalBreakdown(f"coupling row masses off by {resid:.3g}")
        return OrderVerdict("cx", True, q, None, _stats(t0, out.pivots, residual=resid))

    y = out.farkas
    alpha = y[:ns]
    gamma = np.zeros((ns, m.dim))
    gamma[active] = y[ns + nt:].reshape(len(active), m.dim)
    s = _normalized([gamma, alpha])
    pieces = _distinct_rows(np.hstack([-gamma, -alpha[:, None]]) / s)
    f = ConvexPolyhedralFunction(pieces[:, :-1], pieces[:, -1])
    return _certified("cx", f, m, n, t0, out.pivots, cert_tol)


def barycentric_cost(m: DiscreteMeasure, n: DiscreteMeasure, norm: str = "l1",
                     feas_tol: float = lp.FEAS_TOL, cert_tol: float = lp.CERT_TOL) -> BarycentricCost:
    """Smallest ``sum_i m_i |x_i - ba(q^{x_i})|`` over kernels transporting ``m`` to ``n``.

    The L1 problem is an exact LP with split deviations ``s+ - s-``. For the
    Euclidean norm the L1 minimizer is re-evaluated in the Euclidean norm; that
    value is an upper bound (``upper_bound=True``) and is exact when it is zero.
    """
    _same_dim(m, n)
    if norm not in NORMS:
        raise MeasureError(f"unknown norm {norm!r}")
    if mass(m) <= 0:
        raise MeasureError("barycentric cost needs a source of positive mass")
    ns, nt, d = len(m), len(n), m.dim
    mass_rows, mom_rows = _kernel_columns(m.weights, n.points, np.arange(ns))
    nq = ns * nt
    eye = np.eye(ns * d)
    A = np.block([
        [mass_rows, np.zeros((nt, 2 * ns * d))],
        [mom_rows, -eye, eye],
    ])
    b = np.concatenate([n.weights, m.points.ravel()])
    dev_cost = np.repeat(m.weights, d)
    c = np.concatenate([np.zeros(nq), dev_cost, dev_cost])
    out = lp.solve(lp.LinearProgram(c, A, b), feas_tol, cert_tol)
    if not isinstance(out, lp.Optimal):
        raise NumericalBreakdown(f"barycentric cost LP returned {type(out).__name__}")
    q = DiscreteKernel(m.points, n.points, out.z[:nq].reshape(ns, nt), dim=d)
    value = barycentric_deviation(q, m, norm)
    return BarycentricCost(value, q, norm, upper_bound=(norm == "l2"))


def dual_probe(m: DiscreteMeasure, n: DiscreteMeasure, trials: int = 256, k: int = 3,
               seed=0, tol: float = DEFAULT_TOL) -> ProbeResult:
    """Test ``int f dm <= int f dn`` for random support functions with ``k`` pieces.

    A failure is a proof that ``m <=_phc n`` is false; passing is only evidence.
    """
    _same_dim(m, n)
    rng = np.random.default_rng(seed)
    for t in range(trials):
        f = random_support_function(m.dim, k, rng)
        lhs, rhs = integrate(f, m), integrate(f, n)
        if lhs > rhs + tol * (1.0 + abs(lhs) + abs(rhs)):
            return ProbeResult(False, f, lhs - rhs, t + 1)
    return ProbeResult(True, None, 0.0, trials)
