"""Finitely supported measures on R^d and the canonical constructions on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from .errors import MeasureError

DEFAULT_TOL = 1e-9

NORMS = ("l1", "l2")


def _as_points(points, dim: int | None) -> np.ndarray:
    pts = np.array(points, dtype=float)
    if pts.size == 0:
        if dim is None:
            if pts.ndim == 2:
                dim = pts.shape[1]
            else:
                raise MeasureError("cannot infer dimension of an empty atom list")
        return np.zeros((0, dim))
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim == 1 else pts.reshape(1, -1)
    if pts.ndim != 2:
        raise MeasureError(f"points must be a 2-d array, got shape {pts.shape}")
    return pts


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite nonnegative combination of Dirac masses.

    ``points`` has shape ``(n, dim)`` and ``weights`` shape ``(n,)``. Both are
    stored as read-only float arrays; the zero measure is the empty atom list.
    """

    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points, weights, dim: int | None = None):
        pts = _as_points(points, dim)
        w = np.array(weights, dtype=float).reshape(-1)
        if dim is not None and pts.shape[1] != dim:
            raise MeasureError(f"points have dimension {pts.shape[1]}, expected {dim}")
        if pts.shape[1] < 1:
            raise MeasureError("dimension must be at least 1")
        if len(w) != len(pts):
            raise MeasureError(f"{len(pts)} points but {len(w)} weights")
        if not np.all(np.isfinite(pts)):
            raise MeasureError("atom locations must be finite")
        if not np.all(np.isfinite(w)):
            raise MeasureError("weights must be finite")
        if np.any(w < 0):
            raise MeasureError(f"negative weight at atom {int(np.argmax(w < 0))}")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zero(cls, dim: int) -> "DiscreteMeasure":
        return cls(np.zeros((0, dim)), [], dim=dim)

    @classmethod
    def dirac(cls, x: Sequence[float], weight: float = 1.0) -> "DiscreteMeasure":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(x.reshape(1, -1), [weight])

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[Sequence[float], float]], dim: int | None = None):
        atoms = list(atoms)
        if not atoms:
            if dim is None:
                raise MeasureError("empty atom list needs an explicit dim")
            return cls.zero(dim)
        pts = [np.atleast_1d(np.asarray(x, dtype=float)) for x, _ in atoms]
        return cls(np.vstack(pts), [w for _, w in atoms], dim=dim)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self) -> Iterator[tuple[np.ndarray, float]]:
        return iter(zip(self.points, self.weights))

    def __repr__(self) -> str:
        atoms = ", ".join(f"(({', '.join(f'{c:.6g}' for c in x)}), {w:.6g})" for x, w in self)
        return f"DiscreteMeasure(dim={self.dim}, atoms=[{atoms}])"

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights * factor, dim=self.dim)


def coord_scale(points: np.ndarray) -> float:
    """Reference magnitude for relative coordinate tolerances."""
    if points.size == 0:
        return 1.0
    return max(1.0, float(np.max(np.abs(points))))


def mass(m: DiscreteMeasure) -> float:
    return float(np.sum(m.weights))


def first_moment(m: DiscreteMeasure) -> np.ndarray:
    """Barycenter without normalization: the sum of weight times location."""
    return m.weights @ m.points if len(m) else np.zeros(m.dim)


def _cluster(points: np.ndarray, tol: float) -> tuple[np.ndarray, int]:
    # Greedy pass in lexicographic order; a cluster is every unassigned point
    # within tol (max-norm, relative to coord_scale) of its seed.
    n = len(points)
    labels = np.full(n, -1, dtype=int)
    if n == 0:
        return labels, 0
    thr = tol * coord_scale(points)
    order = np.lexsort(points.T[::-1])
    k = 0
    for pos, i in enumerate(order):
        if labels[i] >= 0:
            continue
        labels[i] = k
        rest = order[pos + 1:]
        if len(rest):
            near = np.max(np.abs(points[rest] - points[i]), axis=1) <= thr
            rest = rest[near & (labels[rest] < 0)]
            labels[rest] = k
        k += 1
    return labels, k


def _merge(points: np.ndarray, weights: np.ndarray, tol: float):
    """Cluster and drop light clusters; labels map atoms to kept clusters or -1."""
    dim = points.shape[1]
    labels, k = _cluster(points, tol)
    if k == 0:
        return np.zeros((0, dim)), np.zeros(0), labels
    w = np.bincount(labels, weights=weights, minlength=k)
    seeds = np.zeros((k, dim))
    seeds[labels[::-1]] = points[::-1]  # first member wins
    moments = np.zeros((k, dim))
    np.add.at(moments, labels, weights[:, None] * points)
    locs = np.where(w[:, None] > 0, moments / np.where(w > 0, w, 1.0)[:, None], seeds)
    keep = w > tol
    remap = np.full(k, -1, dtype=int)
    remap[keep] = np.arange(int(keep.sum()))
    return locs[keep], w[keep], remap[labels]


def normalize_merge(m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> DiscreteMeasure:
    """Canonical form: merge atoms closer than ``tol`` and drop weights ``<= tol``.

    Merged clusters sit at their weighted barycenter, so mass and first moment
    are preserved up to roundoff (apart from the dropped negligible weights).
    """
    pts, w, _ = _merge(m.points, m.weights, tol)
    return DiscreteMeasure(pts, w, dim=m.dim)


def same_measure(a: DiscreteMeasure, b: DiscreteMeasure, tol: float = DEFAULT_TOL) -> bool:
    """True if ``a - b`` vanishes after clustering locations within ``tol``.

    Weight residuals are compared against ``tol * max(1, mass)``.
    """
    if a.dim != b.dim:
        raise MeasureError(f"dimension mismatch: {a.dim} vs {b.dim}")
    pts = np.vstack([a.points, b.points])
    signed = np.concatenate([a.weights, -b.weights])
    labels, k = _cluster(pts, tol)
    if k == 0:
        return True
    residual = np.bincount(labels, weights=signed, minlength=k)
    ref = max(1.0, mass(a), mass(b))
    return bool(np.all(np.abs(residual) <= tol * ref))


def _radial_split(m: DiscreteMeasure, tol: float):
    norms = np.linalg.norm(m.points, axis=1)
    nonzero = norms > tol * coord_scale(m.points)
    return norms, nonzero


def homogeneous_marginal_with_labels(m: DiscreteMeasure, tol: float = DEFAULT_TOL):
    """Homogeneous marginal plus, per atom of ``m``, the index of its sphere atom.

    Atoms at the origin (and atoms whose ray carries negligible weight) get
    label -1.
    """
    norms, nonzero = _radial_split(m, tol)
    labels = np.full(len(m), -1, dtype=int)
    if not np.any(nonzero):
        return DiscreteMeasure.zero(m.dim), labels
    dirs = m.points[nonzero] / norms[nonzero, None]
    pts, w, sub = _merge(dirs, m.weights[nonzero] * norms[nonzero], tol)
    labels[nonzero] = sub
    return DiscreteMeasure(pts, w, dim=m.dim), labels


def homogeneous_marginal(m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> DiscreteMeasure:
    """Push the mass of each ray onto the unit sphere, weighted by radius.

    An atom ``(x, w)`` with ``x != 0`` becomes ``(x/|x|, w|x|)``; atoms at the
    origin vanish. The result integrates every positively 1-homogeneous
    function exactly as ``m`` does.
    """
    return homogeneous_marginal_with_labels(m, tol)[0]


def ph_equivalent(a: DiscreteMeasure, b: DiscreteMeasure, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``a`` and ``b`` have the same homogeneous marginal within ``tol``."""
    if a.dim != b.dim:
        raise MeasureError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return same_measure(homogeneous_marginal(a, tol), homogeneous_marginal(b, tol), tol)


def coarsen(m: DiscreteMeasure, n: int) -> DiscreteMeasure:
    """Replace the mass in each grid cube of side ``1/n`` by its barycenter.

    The grid is anchored at ``-a`` on every axis, where ``a`` is the largest
    absolute coordinate, and uses half-open cells ``[low, low + 1/n)``. Enough
    cells are laid out to cover ``[-a, a]``, so an atom at ``+a`` lands in the
    last cell. The output is below ``m`` in convex order and has the same mass
    and first moment.
    """
    if n < 1:
        raise MeasureError(f"n must be a positive integer, got {n}")
    live = m.weights > 0
    if not np.any(live):
        raise MeasureError("cannot coarsen an empty measure")
    pts, w = m.points[live], m.weights[live]
    a = float(np.max(np.abs(pts)))
    cells = np.floor((pts + a) * n).astype(np.int64)
    _, inverse = np.unique(cells, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    k = int(inverse.max()) + 1
    cw = np.bincount(inverse, weights=w, minlength=k)
    moments = np.zeros((k, m.dim))
    np.add.at(moments, inverse, w[:, None] * pts)
    return DiscreteMeasure(moments / cw[:, None], cw, dim=m.dim)


def w1(a: DiscreteMeasure, b: DiscreteMeasure, norm: str = "l2", tol: float = DEFAULT_TOL) -> float:
    """Wasserstein-1 distance between equal-mass measures.

    Both measures are rescaled to probability measures, the transport LP is
    solved, and the optimum is multiplied back by the common mass.
    """
    if a.dim != b.dim:
        raise MeasureError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if norm not in NORMS:
        raise MeasureError(f"unknown norm {norm!r}")
    ma, mb = mass(a), mass(b)
    if ma <= tol or mb <= tol:
        raise MeasureError("w1 needs measures of positive mass")
    if abs(ma - mb) > tol * max(1.0, ma, mb):
        raise MeasureError(f"mass mismatch: {ma!r} vs {mb!r}")
    cost = cdist(a.points, b.points, metric="cityblock" if norm == "l1" else "euclidean")
    na, nb = cost.shape
    rows = np.zeros((na + nb, na * nb))
    for i in range(na):
        rows[i, i * nb:(i + 1) * nb] = 1.0
    for j in range(nb):
        rows[na + j, j::nb] = 1.0
    rhs = np.concatenate([a.weights / ma, b.weights / mb])
    res = linprog(cost.ravel(), A_eq=rows, b_eq=rhs, bounds=(0, None), method="highs")
    if res.status != 0:
        raise MeasureError(f"transport LP failed: {res.message}")
    return float(max(res.fun, 0.0) * ma)


def lift(m: DiscreteMeasure) -> DiscreteMeasure:
    """Embed into the hyperplane ``x_{d+1} = 1`` of R^{d+1}."""
    pts = np.hstack([m.points, np.ones((len(m), 1))])
    return DiscreteMeasure(pts, m.weights, dim=m.dim + 1)


def project(m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> DiscreteMeasure:
    """Drop the last coordinate and merge coinciding atoms."""
    if m.dim < 2:
        raise MeasureError("project needs dim >= 2")
    return normalize_merge(DiscreteMeasure(m.points[:, :-1], m.weights, dim=m.dim - 1), tol)


def flatten_to_hyperplane(m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> DiscreteMeasure:
    """Slide mass along rays onto ``x_{d+1} = 1``, reweighting by the height.

    ``(x, w)`` goes to ``((x_1/x_{d+1}, ..., x_d/x_{d+1}, 1), w x_{d+1})``, which
    leaves integrals of positively 1-homogeneous functions unchanged.
    """
    if m.dim < 2:
        raise MeasureError("flatten_to_hyperplane needs dim >= 2")
    height = m.points[:, -1]
    bad = np.flatnonzero(height <= tol)
    if len(bad):
        raise MeasureError(f"atom {int(bad[0])} is not in the open upper half space")
    pts = m.points / height[:, None]
    pts[:, -1] = 1.0
    return DiscreteMeasure(pts, m.weights * height, dim=m.dim)
