"""Unnormalized kernels between finitely supported measures.

A kernel is stored as a nonnegative matrix ``Q`` with ``q^{x_i} = sum_j Q[i, j] delta_{y_j}``.
Rows need not be probability vectors, and a zero row is a legal kernel value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, MeasureError
from .measures import (
    DEFAULT_TOL,
    NORMS,
    DiscreteMeasure,
    coord_scale,
    homogeneous_marginal_with_labels,
    normalize_merge,
    same_measure,
)


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    source: np.ndarray
    targets: np.ndarray
    Q: np.ndarray

    def __init__(self, source, targets, Q, dim: int | None = None):
        src = np.array(source, dtype=float)
        tgt = np.array(targets, dtype=float)
        if dim is None:
            dim = src.shape[1] if src.ndim == 2 and src.size else tgt.shape[-1]
        src = src.reshape(-1, dim)
        tgt = tgt.reshape(-1, dim)
        Q = np.array(Q, dtype=float).reshape(len(src), len(tgt))
        if not (np.all(np.isfinite(src)) and np.all(np.isfinite(tgt)) and np.all(np.isfinite(Q))):
            raise MeasureError("kernel data must be finite")
        if np.any(Q < 0):
            raise MeasureError("kernel weights must be nonnegative")
        for arr in (src, tgt, Q):
            arr.setflags(write=False)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "targets", tgt)
        object.__setattr__(self, "Q", Q)

    @property
    def dim(self) -> int:
        return self.source.shape[1]

    def row(self, i: int) -> DiscreteMeasure:
        """The measure ``q^{x_i}`` on the target atoms."""
        return DiscreteMeasure(self.targets, self.Q[i], dim=self.dim)

    def row_masses(self) -> np.ndarray:
        return self.Q.sum(axis=1)

    def barycenters(self) -> np.ndarray:
        """Unnormalized first moments ``sum_j Q[i, j] y_j``, one per source atom."""
        return self.Q @ self.targets


def identity_kernel(m: DiscreteMeasure) -> DiscreteKernel:
    return DiscreteKernel(m.points, m.points, np.eye(len(m)), dim=m.dim)


def _check_points(expected: np.ndarray, given: np.ndarray, tol: float, what: str) -> None:
    if expected.shape != given.shape:
        raise AlignmentError(f"{what}: {len(given)} atoms do not match {len(expected)} kernel atoms")
    if len(expected):
        thr = tol * max(coord_scale(expected), coord_scale(given))
        off = np.max(np.abs(expected - given), axis=1)
        bad = np.flatnonzero(off > thr)
        if len(bad):
            raise AlignmentError(f"{what}: atom {int(bad[0])} is off by {off[bad[0]]:.3g}")


def _aligned(q: DiscreteKernel, m: DiscreteMeasure, tol: float) -> None:
    if m.dim != q.dim:
        raise AlignmentError(f"measure has dimension {m.dim}, kernel has {q.dim}")
    _check_points(q.source, m.points, tol, "measure vs kernel source")


def apply(q: DiscreteKernel, m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> DiscreteMeasure:
    """The measure ``int q^x mu(dx)``, in canonical form."""
    _aligned(q, m, tol)
    return normalize_merge(DiscreteMeasure(q.targets, m.weights @ q.Q, dim=q.dim), tol)


def is_transport(q: DiscreteKernel, m: DiscreteMeasure, target: DiscreteMeasure, tol: float = DEFAULT_TOL) -> bool:
    _aligned(q, m, tol)
    pushed = DiscreteMeasure(q.targets, m.weights @ q.Q, dim=q.dim)
    return same_measure(pushed, target, tol)


def moment_residuals(q: DiscreteKernel, m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Per-atom ``|ba(q^{x_i}) - x_i| / (1 + |x_i|)``; zero for atoms of weight ``<= tol``."""
    _aligned(q, m, tol)
    dev = np.linalg.norm(q.barycenters() - q.source, axis=1)
    rel = dev / (1.0 + np.linalg.norm(q.source, axis=1))
    return np.where(m.weights > tol, rel, 0.0)


def is_moment_preserving(q: DiscreteKernel, m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.all(moment_residuals(q, m, tol) <= tol))


def glue(p: DiscreteKernel, q: DiscreteKernel, tol: float = DEFAULT_TOL) -> DiscreteKernel:
    """Composition ``r^x = int q^y p^x(dy)``, i.e. the matrix product ``P Q``."""
    if p.dim != q.dim:
        raise AlignmentError(f"kernels have dimensions {p.dim} and {q.dim}")
    _check_points(q.source, p.targets, tol, "first kernel targets vs second kernel source")
    return DiscreteKernel(p.source, q.targets, p.Q @ q.Q, dim=p.dim)


def barycentric_deviation(q: DiscreteKernel, m: DiscreteMeasure, norm: str = "l2", tol: float = DEFAULT_TOL) -> float:
    """``sum_i m_i |x_i - ba(q^{x_i})|`` in the L1 or Euclidean norm."""
    _aligned(q, m, tol)
    if norm not in NORMS:
        raise MeasureError(f"unknown norm {norm!r}")
    diff = q.source - q.barycenters()
    dist = np.abs(diff).sum(axis=1) if norm == "l1" else np.linalg.norm(diff, axis=1)
    return float(m.weights @ dist)


def sphere_kernel(m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> DiscreteKernel:
    """``p^x = |x| delta_{x/|x|}`` and ``p^0 = 0``; moment-preserving from ``m`` to its marginal.

    Targets are the atoms of ``homogeneous_marginal(m, tol)`` in order, so the
    result glues directly onto ``inverse_sphere_kernel(m, tol)``. A nonzero atom
    whose ray carries negligible total weight gets its own extra target.
    """
    marginal, labels = homogeneous_marginal_with_labels(m, tol)
    norms = np.linalg.norm(m.points, axis=1)
    live = norms > tol * coord_scale(m.points)
    stray = np.flatnonzero(live & (labels < 0))
    targets = np.vstack([marginal.points, m.points[stray] / norms[stray, None]])
    cols = labels.copy()
    cols[stray] = len(marginal) + np.arange(len(stray))
    Q = np.zeros((len(m), len(targets)))
    rows = np.flatnonzero(live)
    Q[rows, cols[rows]] = norms[rows]
    return DiscreteKernel(m.points, targets, Q, dim=m.dim)


def inverse_sphere_kernel(m: DiscreteMeasure, tol: float = DEFAULT_TOL) -> DiscreteKernel:
    """Moment-preserving kernel from the homogeneous marginal of ``m`` back to ``m``.

    For a sphere atom ``u`` whose ray carries the atoms ``x_k`` of ``m``, the row is
    ``sum_k m_k delta_{x_k} / sum_k m_k |x_k|`` plus ``m({0}) / mass(marginal)`` at the
    origin. Source atoms are those of ``homogeneous_marginal(m, tol)`` in its
    order; targets are the nonzero atoms of ``m`` followed by the origin when
    ``m`` charges it.
    """
    marginal, labels = homogeneous_marginal_with_labels(m, tol)
    if len(marginal) == 0:
        raise MeasureError("no inverse sphere kernel for a multiple of delta_0 or the zero measure")
    norms = np.linalg.norm(m.points, axis=1)
    at_origin = norms <= tol * coord_scale(m.points)
    ray_atoms = np.flatnonzero(~at_origin)
    origin_mass = float(m.weights[at_origin].sum())

    targets = m.points[ray_atoms]
    Q = np.zeros((len(marginal), len(ray_atoms)))
    rows = labels[ray_atoms]
    kept = rows >= 0
    Q[rows[kept], np.flatnonzero(kept)] = m.weights[ray_atoms[kept]]
    radial = Q @ norms[ray_atoms]
    Q /= radial[:, None]
    if origin_mass > 0:
        targets = np.vstack([targets, np.zeros((1, m.dim))])
        Q = np.hstack([Q, np.full((len(marginal), 1), origin_mass / marginal.weights.sum())])
    return DiscreteKernel(marginal.points, targets, Q, dim=m.dim)
