"""Polyhedral support functions, convex piecewise-linear functions and Wulff shapes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import InfeasibleError, MeasureError, UnboundedError
from .measures import DiscreteMeasure


def _matrix(rows, name: str, dim: int | None = None) -> np.ndarray:
    arr = np.array(rows, dtype=float)
    if arr.ndim == 1 and dim is not None:
        arr = arr.reshape(-1, dim)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise MeasureError(f"{name} must be a nonempty list of vectors")
    if dim is not None and arr.shape[1] != dim:
        raise MeasureError(f"{name} have length {arr.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise MeasureError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PolyhedralSupportFunction:
    """``f(x) = max_k <c_k, x>``: convex and positively 1-homogeneous."""

    gradients: np.ndarray

    def __init__(self, gradients, dim: int | None = None):
        object.__setattr__(self, "gradients", _matrix(gradients, "gradients", dim))

    @property
    def dim(self) -> int:
        return self.gradients.shape[1]

    def __call__(self, x) -> np.ndarray | float:
        return support_eval(self, x)


@dataclass(frozen=True, eq=False)
class ConvexPolyhedralFunction:
    """``f(x) = max_i (<b_i, x> + a_i)``: a finite maximum of affine maps."""

    gradients: np.ndarray
    offsets: np.ndarray

    def __init__(self, gradients, offsets, dim: int | None = None):
        g = _matrix(gradients, "gradients", dim)
        a = np.array(offsets, dtype=float).reshape(-1)
        if len(a) != len(g) or not np.all(np.isfinite(a)):
            raise MeasureError("need one finite offset per gradient")
        a.setflags(write=False)
        object.__setattr__(self, "gradients", g)
        object.__setattr__(self, "offsets", a)

    @property
    def dim(self) -> int:
        return self.gradients.shape[1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        vals = x @ self.gradients.T + self.offsets
        return vals.max(axis=-1)

    def homogenize(self) -> PolyhedralSupportFunction:
        """Support function on R^{d+1} agreeing with ``self`` on ``x_{d+1} = 1``."""
        return PolyhedralSupportFunction(np.hstack([self.gradients, self.offsets[:, None]]))


@dataclass(frozen=True, eq=False)
class SphericalFunctionSamples:
    """Values ``f(u_k)`` of a function on the unit sphere at finitely many directions."""

    directions: np.ndarray
    values: np.ndarray

    def __init__(self, directions, values, dim: int | None = None):
        u = _matrix(directions, "directions", dim)
        f = np.array(values, dtype=float).reshape(-1)
        if len(f) != len(u) or not np.all(np.isfinite(f)):
            raise MeasureError("need one finite value per direction")
        norms = np.linalg.norm(u, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-9)
        if len(bad):
            raise MeasureError(f"direction {int(bad[0])} is not a unit vector (norm {norms[bad[0]]!r})")
        f.setflags(write=False)
        object.__setattr__(self, "directions", u)
        object.__setattr__(self, "values", f)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]


def support_eval(f: PolyhedralSupportFunction, x) -> np.ndarray | float:
    """``max_k <c_k, x>``; ``x`` may be a single point or an ``(n, d)`` stack."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != f.dim:
        raise MeasureError(f"point has dimension {x.shape[-1]}, function has {f.dim}")
    vals = (x @ f.gradients.T).max(axis=-1)
    return float(vals) if vals.ndim == 0 else vals


def integrate(f, m: DiscreteMeasure) -> float:
    """Sum of ``weight * f(location)`` over the atoms of ``m``."""
    if f.dim != m.dim:
        raise MeasureError(f"function has dimension {f.dim}, measure has {m.dim}")
    if len(m) == 0:
        return 0.0
    return float(m.weights @ f(m.points))


def wulff_support(f: SphericalFunctionSamples, w) -> float:
    """Support function of the Wulff shape ``{x : <x, u_k> <= f_k for all k}`` at ``w``.

    Solved as the LP ``max <x, w>`` over the shape with ``x = x+ - x-`` and slack
    variables, so unboundedness and emptiness come back as LP outcomes.

    Raises
    ------
    UnboundedError
        The directions do not positively span R^d along ``w``.
    InfeasibleError
        The shape is empty.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if len(w) != f.dim:
        raise MeasureError(f"omega has length {len(w)}, expected {f.dim}")
    U = f.directions
    k = len(U)
    A = np.hstack([U, -U, np.eye(k)])
    c = np.concatenate([-w, w, np.zeros(k)])
    out = lp.solve(lp.LinearProgram(c, A, f.values))
    if isinstance(out, lp.Unbounded):
        raise UnboundedError("Wulff shape is unbounded in this direction", ray=out.ray)
    if isinstance(out, lp.Infeasible):
        raise InfeasibleError("Wulff shape is empty", farkas=out.farkas)
    return -out.value


def random_support_function(dim: int, k: int, seed=None) -> PolyhedralSupportFunction:
    """``k`` standard Gaussian gradients in R^dim, reproducible from ``seed``."""
    if k < 1:
        raise MeasureError("k must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return PolyhedralSupportFunction(rng.standard_normal((k, dim)))
