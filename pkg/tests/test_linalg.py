import math

import numpy as np
import pytest

from hmscheme import (
    DimensionMismatch,
    IndefiniteOperator,
    InvalidParams,
    NonSymmetric,
    expm_apply,
    phi,
    spectral_decompose,
    two_norm,
)
from hmscheme.linalg import PHI_SERIES_CUTOFF


def random_psd(rng, n, lam_max=100.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lams = rng.uniform(0.0, lam_max, n)
    a = (q * lams) @ q.T
    return 0.5 * (a + a.T)


def test_scalar_operator():
    op = spectral_decompose([[1000.0]])
    assert op.dim == 1
    assert op.eigenvalues[0] == 1000.0
    assert op.eigenvectors[0, 0] == pytest.approx(1.0)
    assert op.omega == op.lambda_max == 1000.0


def test_diagonal_operator():
    op = spectral_decompose(np.diag([0.0, 3.0]))
    assert np.allclose(op.eigenvalues, [0.0, 3.0])
    assert np.allclose(np.abs(op.eigenvectors), np.eye(2))
    assert op.omega == 0.0
    assert op.norm2 == 3.0


def test_eigenvalues_sorted_and_orthonormal():
    rng = np.random.default_rng(1)
    op = spectral_decompose(random_psd(rng, 17))
    assert np.all(np.diff(op.eigenvalues) >= 0)
    gram = op.eigenvectors.T @ op.eigenvectors
    assert np.max(np.abs(gram - np.eye(17))) < 1e-12


def test_reconstruction():
    rng = np.random.default_rng(2)
    a = random_psd(rng, 40)
    op = spectral_decompose(a)
    rebuilt = (op.eigenvectors * op.eigenvalues_raw) @ op.eigenvectors.T
    assert two_norm(rebuilt - a) <= 1e-10 * max(1.0, two_norm(a))


def test_rejects_nonsymmetric():
    with pytest.raises(NonSymmetric):
        spectral_decompose([[1.0, 2.0], [2.1, 1.0]])
    with pytest.raises(NonSymmetric):
        spectral_decompose(np.ones((2, 3)))


def test_rejects_indefinite():
    with pytest.raises(IndefiniteOperator):
        spectral_decompose(np.diag([-1.0, 1.0]))


def test_clamps_rounding_noise():
    # eigenvalue at -1e-14 is rounding noise on a semidefinite operator
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    a = (q * np.array([-1e-14, 1.0, 2.0])) @ q.T
    op = spectral_decompose(0.5 * (a + a.T))
    assert op.eigenvalues[0] == 0.0
    assert op.eigenvalues_raw[0] <= 0.0
    assert op.omega == 0.0


def test_operator_is_immutable():
    op = spectral_decompose(np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        op.entries[0, 0] = 5.0


def test_expm_identity_at_zero():
    rng = np.random.default_rng(4)
    op = spectral_decompose(random_psd(rng, 9))
    v = rng.standard_normal(9)
    assert np.allclose(expm_apply(op, 0.0, v), v, rtol=0, atol=1e-13)


def test_expm_scalar():
    op = spectral_decompose([[1000.0]])
    out = expm_apply(op, 1e-3, np.array([1.0]))
    assert out[0] == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_expm_decoupled_modes():
    op = spectral_decompose(np.diag([0.0, 3.0]))
    out = expm_apply(op, 1.0, np.array([1.0, 1.0]))
    assert out[0] == pytest.approx(1.0, rel=1e-14)
    assert out[1] == pytest.approx(math.exp(-3.0), rel=1e-14)


def test_expm_norm_bound():
    rng = np.random.default_rng(5)
    tau = 3e-5
    for n in (5, 23, 40):
        op = spectral_decompose(random_psd(rng, n, lam_max=1000.0))
        v = rng.standard_normal(n)
        for t in (0.0, tau, 10 * tau):
            lhs = np.linalg.norm(expm_apply(op, t, v))
            rhs = math.exp(-op.omega * t) * np.linalg.norm(v)
            assert lhs <= rhs * (1 + 1e-10)


def test_expm_semigroup():
    rng = np.random.default_rng(6)
    op = spectral_decompose(random_psd(rng, 12))
    v = rng.standard_normal(12)
    s, t = 0.37, 0.15
    once = expm_apply(op, s + t, v)
    twice = expm_apply(op, s, expm_apply(op, t, v))
    assert np.linalg.norm(once - twice) <= 1e-10 * np.linalg.norm(once)


def test_expm_validation():
    op = spectral_decompose(np.diag([1.0, 2.0]))
    with pytest.raises(DimensionMismatch):
        expm_apply(op, 1.0, np.ones(3))
    with pytest.raises(InvalidParams):
        expm_apply(op, -1.0, np.ones(2))


def test_phi_at_zero_is_exactly_one():
    assert phi(0.0) == 1.0


def test_phi_at_one():
    assert phi(1.0) == pytest.approx(math.e - 1.0, rel=1e-15)


def test_phi_times_t_identity():
    # s * phi(-omega*s) must equal (1 - exp(-omega*s)) / omega
    omega, s = 1000.0, 1e-3
    lhs = s * phi(-omega * s)
    rhs = (1.0 - math.exp(-omega * s)) / omega
    assert lhs == pytest.approx(rhs, rel=1e-14)
    assert lhs == pytest.approx(6.321205588285577e-4, rel=1e-12)


def test_phi_continuity_through_zero():
    assert abs(phi(1e-5) - phi(-1e-5)) < 2e-5


def test_phi_branches_agree_at_cutoff():
    for t in (PHI_SERIES_CUTOFF, -PHI_SERIES_CUTOFF):
        series = 1.0 + t / 2.0 + t * t / 6.0 + t**3 / 24.0
        direct = math.expm1(t) / t
        assert abs(series - direct) < 1e-12
        assert phi(t) == pytest.approx(series, rel=1e-15)


def _power_iteration_norm(m, iters=500):
    gram = m.T @ m
    v = np.full(m.shape[1], 1.0 / math.sqrt(m.shape[1]))
    for _ in range(iters):
        v = gram @ v
        v /= np.linalg.norm(v)
    return math.sqrt(v @ gram @ v)


def test_two_norm_identity():
    assert two_norm(np.eye(2)) == pytest.approx(1.0, abs=1e-15)


def test_two_norm_diagonal():
    assert two_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0, rel=1e-14)


def test_two_norm_nilpotent():
    assert two_norm(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(1.0, abs=1e-15)


def test_two_norm_matches_power_iteration():
    rng = np.random.default_rng(7)
    for _ in range(25):
        m = rng.standard_normal((2, 2)) * rng.uniform(0.1, 10.0)
        ref = _power_iteration_norm(m)
        assert two_norm(m) == pytest.approx(ref, rel=1e-10)


def test_two_norm_closed_form_matches_svd():
    rng = np.random.default_rng(8)
    for _ in range(25):
        m = rng.standard_normal((2, 2))
        assert two_norm(m) == pytest.approx(float(np.linalg.norm(m, 2)), rel=1e-12)
    m = rng.standard_normal((5, 3))
    assert two_norm(m) == pytest.approx(float(np.linalg.norm(m, 2)), rel=1e-12)
