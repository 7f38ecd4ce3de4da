import numpy as np
import pytest

from mcde.errors import DimensionMismatch, DomainViolation, PointBelowBoundary, SingularCovariance
from mcde.estimator import kde_evaluate
from mcde.kernels import get_kernel
from mcde.preprocess import reflect_boundary, transform_variable, whiten


def test_two_point_sample():
    out, wt = whiten([-1.0, 1.0])
    assert np.allclose(out[:, 0], [-1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)], atol=1e-14)
    assert wt.mean[0] == 0.0


def test_whitened_moments(rng):
    base = rng.normal(size=(500, 3))
    mix = np.array([[2.0, 0.5, 0.0], [0.3, 1.0, 0.2], [0.0, -0.4, 3.0]])
    x = base @ mix.T + np.array([5.0, -2.0, 0.7])
    out, wt = whiten(x)
    assert np.max(np.abs(out.mean(axis=0))) < 1e-10
    cov = out.T @ out / (out.shape[0] - 1)
    assert np.max(np.abs(cov - np.eye(3))) < 1e-8
    assert np.max(np.abs(wt.transform @ wt.inverse - np.eye(3))) < 1e-10


def test_idempotence(rng):
    x, _ = whiten(rng.normal(size=(400, 2)))
    again, _ = whiten(x)
    assert np.max(np.abs(again - x)) < 1e-8


def test_round_trip(rng):
    x = rng.normal(size=(100, 2)) @ np.array([[2.0, 0.1], [0.0, 0.5]])
    out, wt = whiten(x)
    assert np.max(np.abs(wt.unapply(out) - x)) < 1e-10


def test_affine_invariance(rng):
    x = rng.normal(size=(200, 3)) * np.array([1.0, 4.0, 0.2])
    ref, _ = whiten(x)
    scaled, _ = whiten(2.5 * x + np.array([1.0, -7.0, 3.0]))
    assert np.max(np.abs(np.abs(scaled) - np.abs(ref))) < 1e-8


def test_singular_covariance():
    with pytest.raises(SingularCovariance):
        whiten(np.column_stack([np.arange(10.0), 2.0 * np.arange(10.0)]))
    with pytest.raises(SingularCovariance):
        whiten(np.ones((5, 1)))
    # N <= D cannot give a positive definite covariance
    with pytest.raises(SingularCovariance):
        whiten(np.eye(3)[:2])


def test_jacobian_det(rng):
    x = rng.normal(size=(300, 2)) * np.array([2.0, 0.5])
    _, wt = whiten(x)
    assert wt.jacobian_det == pytest.approx(np.linalg.det(wt.transform), abs=1e-12)
    assert wt.jacobian_det > 0


def test_reflect_examples():
    out = reflect_boundary([1.0, 2.0], boundary=0.0)
    assert np.allclose(out[:, 0], [1.0, 2.0, -1.0, -2.0])
    out = reflect_boundary([0.0, 3.0], boundary=0.0)
    assert sorted(out[:, 0]) == [-3.0, 0.0, 0.0, 3.0]
    assert reflect_boundary(np.arange(1.0, 8.0), boundary=0.5).shape == (14, 1)


def test_reflect_validation():
    with pytest.raises(PointBelowBoundary):
        reflect_boundary([1.0, -0.5], boundary=0.0)
    with pytest.raises(DimensionMismatch):
        reflect_boundary(np.ones((4, 2)), boundary=0.0)
    with pytest.raises(ValueError):
        reflect_boundary([1.0, 2.0], boundary=0.0, side="upper")


def test_transform_examples():
    out = transform_variable([1.0, np.e], "log")
    assert np.allclose(out[:, 0], [0.0, 1.0], atol=1e-15)
    assert transform_variable([0.5], "logit")[0, 0] == 0.0


def test_transform_round_trip(rng):
    x = rng.uniform(0.05, 0.95, size=50)
    y = transform_variable(x, "logit")[:, 0]
    back = 1.0 / (1.0 + np.exp(-y))
    assert np.max(np.abs(back - x)) < 1e-12


def test_transform_validation():
    with pytest.raises(DomainViolation):
        transform_variable([0.0, 1.0], "log")
    with pytest.raises(DomainViolation):
        transform_variable([0.5, 1.0], "logit")
    with pytest.raises(ValueError):
        transform_variable([0.5], "sqrt")


def test_reflection_flattens_boundary_slope(rng):
    # For a density symmetric about 0 restricted to x >= 0, reflection doubling
    # should make the KDE slope at the boundary ~0.
    x = np.abs(rng.normal(size=2000))
    doubled = reflect_boundary(x, boundary=0.0)
    k = get_kernel("gaussian")
    h = 0.2
    eps = 1e-3
    slope = (
        kde_evaluate(doubled, k, h, eps) - kde_evaluate(doubled, k, h, -eps)
    ) / (2.0 * eps)
    assert abs(slope) < 1e-2
