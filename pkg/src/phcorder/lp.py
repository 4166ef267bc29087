"""Dense two-phase primal simplex for ``min c.z  s.t.  A z = b, z >= 0``.

Pivoting follows Bland's rule (lowest eligible index enters; ratio ties go to
the lowest basic index), so runs are deterministic and cannot cycle. Rows are
scaled to unit max-norm and sign-flipped to ``b >= 0`` before phase 1. Every
outcome is re-verified against the original data before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalBreakdown

FEAS_TOL = 1e-8
CERT_TOL = 1e-9

_RC_TOL = 1e-11  # reduced-cost threshold for entering
_PIV_TOL = 1e-10  # smallest admissible pivot element
_MAX_PIVOTS = 100_000


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if A.shape != (len(b), len(c)):
            raise ValueError(f"A has shape {A.shape}, expected ({len(b)}, {len(c)})")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class Optimal:
    z: np.ndarray
    value: float
    y: np.ndarray
    pivots: int = 0


@dataclass(frozen=True)
class Feasible:
    z: np.ndarray
    pivots: int = 0


@dataclass(frozen=True)
class Infeasible:
    """``farkas`` satisfies ``A.T @ y >= 0`` and ``b @ y < 0`` (unit max-norm)."""

    farkas: np.ndarray
    pivots: int = 0


@dataclass(frozen=True)
class Unbounded:
    """``ray >= 0`` with ``A @ ray = 0`` and ``c @ ray < 0`` (unit max-norm)."""

    ray: np.ndarray
    pivots: int = 0


LPOutcome = Optimal | Infeasible | Unbounded


@dataclass
class _Tableau:
    """Tableau ``B^{-1} [A' | I | b']``, rebuilt from the basis after every pivot."""

    T: np.ndarray
    basis: np.ndarray
    n: int
    obj: np.ndarray = field(default=None)
    costs: np.ndarray = field(default=None)
    pivots: int = 0

    def __post_init__(self):
        self.M = self.T.copy()  # original [A' | I | b'] for refactoring

    @property
    def m(self) -> int:
        return self.T.shape[0]

    def set_costs(self, costs: np.ndarray) -> None:
        # obj[j] = reduced cost of column j, obj[-1] = -(current objective)
        self.costs = costs
        full = np.concatenate([costs, [0.0]])
        self.obj = full - costs[self.basis] @ self.T

    def refactor(self) -> None:
        # Rebuild the tableau from the basis to stop roundoff accumulating.
        B = self.M[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.M)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown("singular basis matrix") from exc
        self.T[np.abs(self.T) < 1e-13] = 0.0
        self.T[np.arange(self.m), self.basis] = 1.0
        if self.costs is not None:
            self.set_costs(self.costs)

    def pivot(self, r: int, j: int) -> None:
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > _MAX_PIVOTS:
            raise NumericalBreakdown("simplex pivot limit exceeded")
        self.refactor()

    def entering(self, allowed: int) -> int | None:
        cand = np.flatnonzero(self.obj[:allowed] < -_RC_TOL)
        return int(cand[0]) if len(cand) else None

    def leaving(self, j: int) -> int | None:
        col = self.T[:, j]
        rows = np.flatnonzero(col > _PIV_TOL * max(1.0, float(np.max(np.abs(col)))))
        if not len(rows):
            return None
        ratios = np.maximum(self.T[rows, -1], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + best)]
        return int(ties[np.argmin(self.basis[ties])])

    def run(self, allowed: int) -> int | None:
        """Pivot to optimality; returns an unbounded column index, if any."""
        while True:
            j = self.entering(allowed)
            if j is None:
                return None
            r = self.leaving(j)
            if r is None:
                return j
            self.pivot(r, j)


def _scale_rows(A: np.ndarray, b: np.ndarray):
    s = np.max(np.abs(A), axis=1) if A.size else np.zeros(len(b))
    s = np.where(s > 0, s, 1.0)
    sign = np.where(b < 0, -1.0, 1.0)
    d = sign / s
    return A * d[:, None], b * d, d


def _phase_one(A: np.ndarray, b: np.ndarray, feas_tol: float):
    m, n = A.shape
    As, bs, d = _scale_rows(A, b)
    tab = _Tableau(np.hstack([As, np.eye(m), bs[:, None]]), np.arange(n, n + m), n)
    costs = np.concatenate([np.zeros(n), np.ones(m)])
    tab.set_costs(costs)
    tab.run(n + m)
    M = np.hstack([As, np.eye(m)])
    value = -tab.obj[-1]
    if value > feas_tol:
        y1 = _basis_solve(M[:, tab.basis].T, costs[tab.basis])
        return tab, As, bs, d, -y1 * d
    _drive_out_artificials(tab)
    return tab, As, bs, d, None


def _drive_out_artificials(tab: _Tableau) -> None:
    n = tab.n
    for r in range(tab.m):
        if tab.basis[r] < n:
            continue
        row = np.abs(tab.T[r, :n])
        if row.size and row.max() > 1e-7:
            tab.pivot(r, int(np.argmax(row)))
        # otherwise the row is redundant and its artificial stays basic at zero


def _basis_solve(B: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown("singular basis matrix") from exc


def _unit(v: np.ndarray) -> np.ndarray:
    s = np.max(np.abs(v)) if v.size else 0.0
    return v / s if s > 0 else v


def _check_farkas(A: np.ndarray, b: np.ndarray, y: np.ndarray, feas_tol: float, cert_tol: float):
    y = _unit(y)
    if not (np.all(A.T @ y >= -feas_tol) and b @ y <= -cert_tol):
        raise NumericalBreakdown(
            f"Farkas certificate failed verification (min A^T y = {np.min(A.T @ y, initial=0.0):.3g}, "
            f"b.y = {b @ y:.3g})"
        )
    return y


def _primal_point(tab: _Tableau, As: np.ndarray, bs: np.ndarray, feas_tol: float) -> np.ndarray:
    m, n = As.shape
    M = np.hstack([As, np.eye(m)])
    zB = _basis_solve(M[:, tab.basis], bs)
    full = np.zeros(n + m)
    full[tab.basis] = zB
    if np.any(full < -feas_tol):
        raise NumericalBreakdown(f"basic solution has negative entry {full.min():.3g}")
    if np.any(np.abs(full[n:]) > feas_tol):
        raise NumericalBreakdown("artificial variable left at a nonzero level")
    z = np.maximum(full[:n], 0.0)
    resid = np.max(np.abs(As @ z - bs), initial=0.0)
    if resid > feas_tol:
        raise NumericalBreakdown(f"primal residual {resid:.3g} exceeds feas_tol")
    return z


def feasibility(A, b, feas_tol: float = FEAS_TOL, cert_tol: float = CERT_TOL) -> Feasible | Infeasible:
    """Phase 1 only: a point of ``{z >= 0 : A z = b}`` or a Farkas certificate."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != len(b):
        raise ValueError(f"A has {A.shape[0]} rows but b has length {len(b)}")
    if len(b) == 0:
        return Feasible(np.zeros(A.shape[1]))
    tab, As, bs, _, y = _phase_one(A, b, feas_tol)
    if y is not None:
        return Infeasible(_check_farkas(A, b, y, feas_tol, cert_tol), tab.pivots)
    return Feasible(_primal_point(tab, As, bs, feas_tol), tab.pivots)


def solve(p: LinearProgram, feas_tol: float = FEAS_TOL, cert_tol: float = CERT_TOL) -> LPOutcome:
    """Solve ``p`` with the two-phase simplex method.

    Returns
    -------
    Optimal
        Optimal vertex ``z``, objective value, and equality duals ``y``
        (``c - A.T @ y >= 0`` up to tolerance).
    Infeasible
        Farkas vector for ``A z = b, z >= 0``.
    Unbounded
        Improving recession direction.

    Raises
    ------
    NumericalBreakdown
        When a witness fails its residual check.
    """
    A, b, c = p.A, p.b, p.c
    m, n = A.shape
    if m == 0:
        neg = np.flatnonzero(c < 0)
        if len(neg):
            ray = np.zeros(n)
            ray[neg[0]] = 1.0
            return Unbounded(ray)
        return Optimal(np.zeros(n), 0.0, np.zeros(0))

    tab, As, bs, d, y = _phase_one(A, b, feas_tol)
    if y is not None:
        return Infeasible(_check_farkas(A, b, y, feas_tol, cert_tol), tab.pivots)

    costs = np.concatenate([c, np.zeros(m)])
    tab.set_costs(costs)
    j = tab.run(n)
    if j is not None:
        ray = np.zeros(n)
        ray[j] = 1.0
        for r, k in enumerate(tab.basis):
            if k < n:
                ray[k] = -tab.T[r, j]
        ray = _unit(np.maximum(ray, 0.0))
        cscale = max(1.0, float(np.max(np.abs(c))))
        if not (np.max(np.abs(As @ ray), initial=0.0) <= feas_tol and c @ ray < -cert_tol * cscale):
            raise NumericalBreakdown("unbounded ray failed verification")
        return Unbounded(ray, tab.pivots)

    z = _primal_point(tab, As, bs, feas_tol)
    M = np.hstack([As, np.eye(m)])
    ys = _basis_solve(M[:, tab.basis].T, costs[tab.basis])
    reduced = c - As.T @ ys
    cscale = max(1.0, float(np.max(np.abs(c))))
    if np.any(reduced < -feas_tol * cscale) or abs(z @ reduced) > feas_tol * cscale * max(1.0, z.sum()):
        raise NumericalBreakdown("optimality conditions failed verification")
    return Optimal(z, float(c @ z), ys * d, tab.pivots)
