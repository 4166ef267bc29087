import math

import numpy as np
import pytest

from phcorder import (
    AlignmentError,
    DiscreteKernel,
    DiscreteMeasure,
    MeasureError,
    apply,
    barycentric_deviation,
    glue,
    homogeneous_marginal,
    identity_kernel,
    inverse_sphere_kernel,
    is_moment_preserving,
    is_transport,
    mass,
    same_measure,
    sphere_kernel,
)
from phcorder.kernels import moment_residuals

from _instances import measure_with_rays, random_measure


def M(*atoms):
    return DiscreteMeasure.from_atoms(atoms)


def random_kernel(rng, source, n_targets, d):
    targets = rng.uniform(-2, 2, (n_targets, d))
    Q = rng.uniform(0, 1, (len(source), n_targets)) * (rng.random((len(source), n_targets)) < 0.7)
    return DiscreteKernel(source, targets, Q, dim=d)


def image(q, m):
    """Pushforward kept on the kernel's target list (no merging), so kernels stay aligned."""
    return DiscreteMeasure(q.targets, m.weights @ q.Q, dim=q.dim)


HALF = DiscreteKernel([[1, 0]], [[2, 0]], [[0.5]])


def test_apply_examples():
    rng = np.random.default_rng(0)
    m = random_measure(rng, 2)
    assert same_measure(apply(identity_kernel(m), m), m)
    zero = DiscreteKernel(m.points, m.points, np.zeros((len(m), len(m))))
    assert len(apply(zero, m)) == 0
    assert same_measure(apply(HALF, M(((1, 0), 1))), M(((2, 0), 0.5)))


def test_alignment_is_checked():
    with pytest.raises(AlignmentError):
        apply(HALF, M(((0, 1), 1)))
    with pytest.raises(AlignmentError):
        apply(HALF, M(((1, 0), 1), ((0, 1), 1)))


def test_kernel_rejects_negative_entries():
    with pytest.raises(MeasureError):
        DiscreteKernel([[0.0]], [[1.0]], [[-0.5]])


def test_is_transport_examples():
    rng = np.random.default_rng(1)
    m = random_measure(rng, 2)
    assert is_transport(identity_kernel(m), m, m)
    zero = DiscreteKernel(m.points, m.points, np.zeros((len(m), len(m))))
    assert not is_transport(zero, m, m)
    mu = M(((2, 0), 1))
    assert is_transport(sphere_kernel(mu), mu, M(((1, 0), 2)))


def test_is_moment_preserving_examples():
    rng = np.random.default_rng(2)
    m = random_measure(rng, 3)
    assert is_moment_preserving(identity_kernel(m), m)
    assert is_moment_preserving(HALF, M(((1, 0), 1)))
    assert not is_moment_preserving(DiscreteKernel([[1, 0]], [[0, 1]], [[1.0]]), M(((1, 0), 1)))


def test_moment_check_ignores_weightless_atoms():
    q = DiscreteKernel([[1, 0], [5, 5]], [[2, 0]], [[0.5], [0.0]])
    m = DiscreteMeasure([[1, 0], [5, 5]], [1.0, 0.0])
    assert is_moment_preserving(q, m)
    assert moment_residuals(q, m)[1] == 0


def test_glue_examples():
    rng = np.random.default_rng(3)
    m = random_measure(rng, 2)
    q = random_kernel(rng, m.points, 4, 2)
    assert np.allclose(glue(identity_kernel(m), q).Q, q.Q)
    p = random_kernel(rng, m.points, 3, 2)
    assert np.allclose(glue(p, identity_kernel(image(p, m))).Q, p.Q)
    r = glue(DiscreteKernel([[0.0]], [[1.0]], [[2.0]]), DiscreteKernel([[1.0]], [[5.0]], [[3.0]]))
    assert r.Q.tolist() == [[6.0]]
    assert r.targets.tolist() == [[5.0]]


def test_glue_alignment():
    with pytest.raises(AlignmentError):
        glue(HALF, DiscreteKernel([[3, 0]], [[1, 1]], [[1.0]]))


def test_barycentric_deviation_examples():
    rng = np.random.default_rng(4)
    m = random_measure(rng, 2)
    assert barycentric_deviation(identity_kernel(m), m) == pytest.approx(0, abs=1e-12)
    q = DiscreteKernel([[1, 0]], [[0, 1]], [[1.0]])
    assert barycentric_deviation(q, M(((1, 0), 1)), "l1") == pytest.approx(2)
    assert barycentric_deviation(q, M(((1, 0), 1)), "l2") == pytest.approx(math.sqrt(2))
    q = DiscreteKernel([[1], [-1]], [[0]], [[1.0], [1.0]])
    assert barycentric_deviation(q, DiscreteMeasure([[1], [-1]], [1, 1]), "l1") == pytest.approx(2)


def test_sphere_kernel_examples():
    q = sphere_kernel(M(((2, 0), 1)))
    assert q.targets.tolist() == [[1.0, 0.0]] and q.Q.tolist() == [[2.0]]
    z = DiscreteMeasure.dirac([0, 0])
    q = sphere_kernel(z)
    assert q.Q.shape == (1, 0)
    assert len(apply(q, z)) == 0
    q = sphere_kernel(M(((3, 4), 1)))
    assert q.targets[0] == pytest.approx([0.6, 0.8])
    assert q.Q[0, 0] == pytest.approx(5)


def test_inverse_sphere_kernel_examples():
    m = M(((1, 0), 1), ((3, 0), 1))
    q = inverse_sphere_kernel(m)
    marginal = homogeneous_marginal(m)
    assert same_measure(marginal, M(((1, 0), 4)))
    assert q.Q.tolist() == [[0.25, 0.25]]
    assert q.barycenters()[0] == pytest.approx([1, 0])
    assert is_transport(q, marginal, m)

    q = inverse_sphere_kernel(M(((2, 0), 1)))
    assert q.Q.tolist() == [[0.5]] and q.targets.tolist() == [[2.0, 0.0]]


def test_inverse_sphere_kernel_with_origin():
    m = M(((2, 0), 1), ((0, 0), 3))
    q = inverse_sphere_kernel(m)
    marginal = homogeneous_marginal(m)
    assert is_transport(q, marginal, m)
    assert is_moment_preserving(q, marginal)
    assert q.Q[0, -1] == pytest.approx(3 / 2)


def test_inverse_sphere_kernel_errors():
    with pytest.raises(MeasureError):
        inverse_sphere_kernel(DiscreteMeasure.dirac([0, 0], 2.0))
    with pytest.raises(MeasureError):
        inverse_sphere_kernel(DiscreteMeasure.zero(2))


def test_sphere_kernels_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        m = measure_with_rays(rng, d)
        marginal = homogeneous_marginal(m)
        p, q = sphere_kernel(m), inverse_sphere_kernel(m)
        assert is_transport(p, m, marginal) and is_moment_preserving(p, m)
        assert is_transport(q, marginal, m) and is_moment_preserving(q, marginal)
        r = glue(p, q)
        assert is_transport(r, m, m) and is_moment_preserving(r, m)


def test_gluing_transports_and_preserves_moments():
    rng = np.random.default_rng(6)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        mu = random_measure(rng, d)
        p = random_kernel(rng, mu.points, 4, d)
        nu = image(p, mu)
        q = random_kernel(rng, nu.points, 3, d)
        rho = image(q, nu)
        assert is_transport(glue(p, q), mu, rho)


def test_gluing_inequality():
    # |x - ba(r^x)| is at most the deviation of p at x plus the q-deviations averaged by p^x
    rng = np.random.default_rng(7)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        mu = random_measure(rng, d)
        p = random_kernel(rng, mu.points, 4, d)
        nu = image(p, mu)
        q = random_kernel(rng, nu.points, 3, d)
        for norm in ("l1", "l2"):
            lhs = barycentric_deviation(glue(p, q), mu, norm)
            rhs = barycentric_deviation(p, mu, norm) + barycentric_deviation(q, nu, norm)
            assert lhs <= rhs + 1e-9 * max(1.0, rhs)


def test_moment_preservation_is_closed_under_gluing():
    rng = np.random.default_rng(8)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        mu = random_measure(rng, d)
        p, nu = _moment_kernel(rng, mu)
        q, _ = _moment_kernel(rng, nu)
        assert is_moment_preserving(glue(p, q), mu)


def _moment_kernel(rng, m):
    """Random moment-preserving kernel with two targets per source atom."""
    k, d = len(m), m.dim
    targets = np.zeros((2 * k, d))
    Q = np.zeros((k, 2 * k))
    for i, x in enumerate(m.points):
        a, b = rng.uniform(0.2, 1.5, 2)
        y = rng.uniform(-2, 2, d)
        targets[2 * i], targets[2 * i + 1] = y, (x - a * y) / b
        Q[i, 2 * i], Q[i, 2 * i + 1] = a, b
    q = DiscreteKernel(m.points, targets, Q)
    assert mass(image(q, m)) > 0
    return q, image(q, m)
