import math

import numpy as np
import pytest

from hmscheme import (
    ConstEps,
    HMParams,
    InvalidParams,
    LinearInH,
    LinearInTau,
    SchemeState,
    SingularIndicator,
    StepCountOverflow,
    block_eigenvalues,
    build_amplification,
    build_block,
    epsilon_policy_bounds,
    exact_separation,
    full_power_norm_curve,
    growth_indicator,
    hm_step,
    monotonicity_witness,
    operator_blocks,
    power_norm_curve,
    samarskii_check,
    scalar_problem,
    spectral_decompose,
    stability_report,
    two_norm,
)

ET = 20.0 / 3.0
PARAMS = HMParams(tau=3e-5, eps=2e-4)


def random_psd_operator(rng, n, lam_max):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = (q * rng.uniform(0.0, lam_max, n)) @ q.T
    return spectral_decompose(0.5 * (a + a.T))


def test_build_block_mu_zero():
    block = build_block(0.0, ET)
    assert block.entries[0, 0] == pytest.approx(80.0 / 43.0, rel=1e-14)
    assert block.entries[0, 1] == pytest.approx(-37.0 / 43.0, rel=1e-14)
    assert block.entries[1, 0] == 1.0
    assert block.entries[1, 1] == 0.0


def test_build_block_paper_regime():
    block = build_block(0.03, ET)
    assert block.entries[0, 0] == pytest.approx(1.856279, abs=1e-6)
    assert block.entries[0, 1] == pytest.approx(-0.860465, abs=1e-6)


def test_build_block_two_level_degeneration():
    assert build_block(0.1, 0.5).entries[0, 1] == 0.0


def test_build_block_validation():
    with pytest.raises(InvalidParams):
        build_block(0.1, 0.0)
    with pytest.raises(InvalidParams):
        build_block(-0.1, 1.0)


def test_block_determinant():
    rng = np.random.default_rng(30)
    for _ in range(50):
        et = 10.0 ** rng.uniform(-2, 2)
        mu = rng.uniform(0.0, 8 * et)
        block = build_block(mu, et)
        direct = float(np.linalg.det(block.entries))
        assert block.det == pytest.approx(-(1 - 2 * et) / (1 + 2 * et), rel=1e-12)
        assert direct == pytest.approx(block.det, abs=1e-12 * (1 + abs(block.det)))
        assert abs(block.det) < 1.0


def test_zero_mode_eigenvalue_pair():
    rng = np.random.default_rng(31)
    for _ in range(100):
        et = 10.0 ** rng.uniform(-3, 3)
        eig = block_eigenvalues(0.0, et)
        assert abs(eig.xi1 - 1.0) <= 1e-12
        assert abs(eig.xi2 - (-(1 - 2 * et) / (1 + 2 * et))) <= 1e-12


def test_boundary_eigenvalues():
    # at mu = 4*et the radicand collapses to 1: xi2 = -1, xi1 = (1-2et)/(1+2et)
    for et in (0.2, 0.5, ET, 31.0):
        eig = block_eigenvalues(4.0 * et, et)
        assert eig.xi2.real == pytest.approx(-1.0, abs=1e-12)
        assert abs(eig.xi2.imag) <= 1e-15
        assert eig.xi1.real == pytest.approx((1 - 2 * et) / (1 + 2 * et), abs=1e-12)


def test_eigenvalues_paper_regime():
    eig = block_eigenvalues(0.03, ET)
    assert eig.discriminant == pytest.approx(0.2009, rel=1e-12)
    # oracle: roots of the characteristic polynomial from a general solver
    roots = sorted(np.roots([1 + 2 * ET, 2 * 0.03 - 4 * ET, 2 * ET - 1]), reverse=True)
    assert eig.xi1 == pytest.approx(roots[0], abs=1e-12)
    assert eig.xi2 == pytest.approx(roots[1], abs=1e-12)
    assert eig.xi1.real == pytest.approx(0.959411, abs=1e-5)
    assert eig.xi2.real == pytest.approx(0.896868, abs=1e-5)
    assert eig.separation == pytest.approx(0.062542, abs=1e-6)


def test_characteristic_polynomial_residual():
    for et in (0.1, 0.5, 2.0 / 3.0, 1.0, ET, 50.0):
        for mu in np.linspace(8 * et / 200, 8 * et, 200):
            eig = block_eigenvalues(float(mu), et)
            for xi in (eig.xi1, eig.xi2):
                residual = abs((1 + 2 * et) * xi * xi + (2 * mu - 4 * et) * xi + (2 * et - 1))
                assert residual <= 1e-12


def test_eigenvalue_product_rule():
    rng = np.random.default_rng(32)
    for _ in range(100):
        et = 10.0 ** rng.uniform(-2, 2)
        mu = rng.uniform(0.0, 8 * et)
        eig = block_eigenvalues(mu, et)
        assert abs(eig.xi1 * eig.xi2) == pytest.approx(abs(2 * et - 1) / (1 + 2 * et), abs=1e-12)


def test_complex_pair_modulus():
    rng = np.random.default_rng(33)
    found = 0
    for _ in range(200):
        et = 10.0 ** rng.uniform(-1, 2)
        mu = rng.uniform(0.0, 8 * et)
        eig = block_eigenvalues(mu, et)
        if eig.discriminant < 0:
            found += 1
            assert eig.xi1 == pytest.approx(eig.xi2.conjugate(), abs=1e-14)
            expected = math.sqrt(abs(2 * et - 1) / (1 + 2 * et))
            assert abs(eig.xi1) == pytest.approx(expected, rel=1e-12)
            assert abs(eig.xi1) < 1.0
    assert found > 10


def test_exact_separation_consistency():
    rng = np.random.default_rng(34)
    for _ in range(100):
        et = 10.0 ** rng.uniform(-2, 2)
        mu = rng.uniform(0.0, 8 * et)
        eig = block_eigenvalues(mu, et)
        assert exact_separation(mu, et) == pytest.approx(eig.separation, abs=1e-12)


def test_exact_separation_values():
    assert exact_separation(0.03, ET) == pytest.approx(2 * math.sqrt(0.2009) / (1 + 2 * ET), rel=1e-13)
    assert exact_separation(0.0, ET) == pytest.approx(2.0 / (1 + 2 * ET), rel=1e-13)
    # double-root locus: mu = 2*et - sqrt(4*et^2 - 1)
    mu_star = 2 * ET - math.sqrt(4 * ET * ET - 1.0)
    assert exact_separation(mu_star, ET) < 1e-7


def test_samarskii_paper_numbers():
    verdict = samarskii_check(PARAMS, 1000.0)
    assert verdict.tau_bound == pytest.approx(math.sqrt(8e-7), rel=1e-14)
    assert abs(verdict.tau_bound - 8.9443e-4) <= 1e-8
    assert verdict.stable
    assert verdict.margin == pytest.approx(verdict.tau_bound - 3e-5, rel=1e-12)


def test_samarskii_boundary_is_unstable():
    bound = math.sqrt(4 * PARAMS.eps / 1000.0)
    assert not samarskii_check(HMParams(tau=bound, eps=PARAMS.eps), 1000.0).stable
    assert samarskii_check(HMParams(tau=np.nextafter(bound, 0.0), eps=PARAMS.eps), 1000.0).stable


def test_samarskii_kappa_form():
    lam = 1000.0
    at_quarter = HMParams.from_kappa(tau=3e-5, kappa=lam / 4.0)
    assert not samarskii_check(at_quarter, lam).stable
    above = HMParams.from_kappa(tau=3e-5, kappa=lam / 4.0 * 1.001)
    assert samarskii_check(above, lam).stable


def test_samarskii_validation():
    with pytest.raises(InvalidParams):
        samarskii_check(PARAMS, 0.0)


def test_amplification_scalar_reduces_to_block():
    A = scalar_problem(1000.0)
    s = build_amplification(A, PARAMS)
    block = build_block(PARAMS.tau * 1000.0, PARAMS.eps_tilde)
    assert np.allclose(s, block.entries, rtol=1e-15, atol=0)


def test_amplification_reproduces_step():
    rng = np.random.default_rng(35)
    A = random_psd_operator(rng, 6, 400.0)
    params = HMParams(tau=1e-3, eps=5e-3)
    s = build_amplification(A, params)
    y0 = rng.standard_normal(6)
    y1 = rng.standard_normal(6)
    stacked = s @ np.concatenate([y1, y0])
    stepped = hm_step(A, None, SchemeState(n=1, t=params.tau, y_prev=y0, y_curr=y1), params)
    assert np.linalg.norm(stacked[:6] - stepped.y_curr) <= 1e-13 * np.linalg.norm(stepped.y_curr)
    assert np.array_equal(stacked[6:], y1)


def test_amplification_spectrum_is_union_of_blocks():
    rng = np.random.default_rng(36)
    A = random_psd_operator(rng, 9, 700.0)
    params = HMParams(tau=1e-3, eps=5e-3)
    dense = np.linalg.eigvals(build_amplification(A, params))
    from_blocks = []
    for lam in A.eigenvalues:
        eig = block_eigenvalues(params.tau * float(lam), params.eps_tilde)
        from_blocks.extend([eig.xi1, eig.xi2])
    dense = sorted(dense, key=lambda z: (z.real, z.imag))
    from_blocks = sorted(from_blocks, key=lambda z: (z.real, z.imag))
    assert all(abs(a - b) <= 1e-8 for a, b in zip(dense, from_blocks))


def test_power_norm_exceeds_one_in_stable_region():
    block = build_block(0.03, ET)
    curve = power_norm_curve([block], n_max=1)
    assert curve[0] == pytest.approx(two_norm(block.entries), rel=1e-14)
    assert curve[0] > abs(block.entries[0, 0]) > 1.0
    eig = block_eigenvalues(0.03, ET)
    assert max(abs(eig.xi1), abs(eig.xi2)) < 1.0


def test_power_norms_bounded_at_stability_boundary():
    # xi2 = -1 is simple there, so the powers stay bounded
    curve = power_norm_curve([build_block(4 * ET, ET)], n_max=10_000)
    assert np.all(np.isfinite(curve))
    assert curve.max() < 50.0


def test_power_norms_double_root_transient():
    mu_star = 2 * ET - math.sqrt(4 * ET * ET - 1.0)
    block = build_block(mu_star, ET)
    n_max = 400
    curve = power_norm_curve([block], n_max=n_max)
    # Jordan oracle: S^n = xi^n I + n xi^(n-1) (S - xi I) with xi = trace/2
    xi = float(np.trace(block.entries)) / 2.0
    nilpotent = block.entries - xi * np.eye(2)
    for n in (1, 5, 13, 60, 200, 400):
        oracle = two_norm(xi**n * np.eye(2) + n * xi ** (n - 1) * nilpotent)
        assert curve[n - 1] == pytest.approx(oracle, rel=1e-6)
    peak = int(np.argmax(curve))
    assert 5 <= peak <= 30
    assert curve[peak] > curve[0]
    assert curve[-1] < 0.1 * curve[peak]


def test_power_norms_decay_for_all_stable_blocks():
    # spectral radius < 1 below the boundary forces eventual decay
    from hmscheme.stability import _power_norm_matrix

    mus = np.linspace(0.05, 4 * ET * 0.99, 12)
    base = np.stack([build_block(float(mu), ET).entries for mu in mus])
    norms = _power_norm_matrix(base, 10_000)
    for j, mu in enumerate(mus):
        eig = block_eigenvalues(float(mu), ET)
        assert max(abs(eig.xi1), abs(eig.xi2)) < 1.0
        peak = norms[:, j].max()
        assert norms[-1, j] < peak
        assert norms[-1, j] < 1e-3 * peak  # long past the transient


def test_power_norm_curve_operator_source():
    A = scalar_problem(1000.0)
    via_operator = power_norm_curve(A, PARAMS, n_max=50)
    via_blocks = power_norm_curve(operator_blocks(A, PARAMS), n_max=50)
    assert np.array_equal(via_operator, via_blocks)
    with pytest.raises(InvalidParams):
        power_norm_curve(A, n_max=10)
    with pytest.raises(StepCountOverflow):
        power_norm_curve(A, PARAMS, n_max=10_000_001)


def test_power_norm_curve_stop_above():
    # mu beyond the stability bound: curve must cut right after the guard trips
    block = build_block(10 * ET, ET)
    curve = power_norm_curve([block], n_max=1000, stop_above=1e6)
    assert len(curve) < 1000
    assert curve[-1] > 1e6
    assert np.all(curve[:-1] <= 1e6)


def test_full_matrix_curve_matches_block_curve():
    rng = np.random.default_rng(37)
    params = HMParams(tau=1e-3, eps=5e-3)
    for n in (4, 17, 40):
        A = random_psd_operator(rng, n, 100.0)
        dense = full_power_norm_curve(A, params, 200)
        blocks = power_norm_curve(A, params, n_max=200)
        assert np.max(np.abs(dense - blocks) / blocks) <= 1e-8


def test_growth_indicator_paper_values():
    value = growth_indicator(1000.0, PARAMS)
    assert value == pytest.approx(16.0252, abs=2e-4)
    separation = exact_separation(PARAMS.tau * 1000.0, PARAMS.eps_tilde)
    assert 1.0 / separation == pytest.approx(15.9892, abs=2e-4)
    assert abs(value - 1.0 / separation) / (1.0 / separation) < 0.003


def test_growth_indicator_zero_lambda():
    assert growth_indicator(0.0, PARAMS) == pytest.approx(43.0 / 6.0, rel=1e-13)


def test_growth_indicator_singular_point():
    lam = 1.0 / (4.0 * PARAMS.eps)
    with pytest.raises(SingularIndicator):
        growth_indicator(lam, PARAMS)


def test_indicator_tracks_inverse_separation():
    # across the operating mode range the small-mu approximation stays within 10%
    for lam in np.linspace(1.0, 1000.0, 200):
        indicator = growth_indicator(float(lam), PARAMS)
        inv_sep = 1.0 / exact_separation(PARAMS.tau * float(lam), PARAMS.eps_tilde)
        assert abs(indicator - inv_sep) <= 0.10 * inv_sep


def test_reference_curves():
    from hmscheme import reference_curves

    assert reference_curves(0.0) == (1.0, 1.0)
    decay, euler = reference_curves(2.0)
    assert decay == pytest.approx(math.exp(-2.0), rel=1e-15)
    assert euler == pytest.approx(1.0 / 3.0, rel=1e-15)
    with pytest.raises(InvalidParams):
        reference_curves(-1.0)


def test_monotonicity_witness_paper_regime():
    witness = monotonicity_witness(PARAMS)
    assert witness is not None
    assert witness.mu == pytest.approx(0.03)
    assert (witness.y0, witness.y1) == (3.0, 1.0)
    assert witness.y2 == pytest.approx(1.856279 - 2.581395, abs=1e-5)
    assert witness.y2 < 0.0


def test_monotonicity_witness_absent_for_small_ratio():
    assert monotonicity_witness(HMParams(tau=1.0, eps=0.4)) is None
    assert monotonicity_witness(HMParams(tau=1.0, eps=0.5)) is None


def test_monotonicity_witness_persists_as_tau_shrinks():
    # block entries depend only on (mu, eps/tau), so the witness survives tau -> 0
    reference = monotonicity_witness(PARAMS)
    for scale in (1e-2, 1e-4, 1e-6):
        params = HMParams(tau=PARAMS.tau * scale, eps=PARAMS.eps * scale)
        witness = monotonicity_witness(params)
        assert witness.y2 == pytest.approx(reference.y2, rel=1e-12)
        assert witness.y2 < 0.0


def test_monotonicity_witness_generic_ratios():
    rng = np.random.default_rng(38)
    for _ in range(50):
        et = rng.uniform(0.51, 100.0)
        witness = monotonicity_witness(HMParams(tau=1.0, eps=et))
        assert witness is not None
        assert witness.y0 > 0 and witness.y1 > 0
        assert witness.y2 < 0.0
        assert 0.0 < witness.mu < 4.0 * et


def test_policy_bounds_const_eps():
    bound = epsilon_policy_bounds(ConstEps(2e-4), lambda_max=1000.0)
    assert abs(bound.tau_max - 8.9443e-4) <= 1e-8


def test_policy_bounds_linear_in_tau():
    h = 0.0628
    bound = epsilon_policy_bounds(LinearInTau(1.0), lambda_max=4.0 / h**2)
    assert bound.tau_max == pytest.approx(h**2, rel=1e-12)
    assert bound.tau_max == pytest.approx(3.944e-3, abs=5e-6)


def test_policy_bounds_linear_in_h_independent_of_k():
    h = 2 * math.pi / 101
    for k in (0.5, 3.0):
        bound = epsilon_policy_bounds(LinearInH(k), h=h)
        assert bound.tau_max == pytest.approx(h**1.5, rel=1e-13)


def test_policy_bounds_validation():
    with pytest.raises(InvalidParams):
        epsilon_policy_bounds(ConstEps(2e-4))
    with pytest.raises(InvalidParams):
        epsilon_policy_bounds(LinearInH(1.0))
    with pytest.raises(InvalidParams):
        epsilon_policy_bounds("not-a-policy", lambda_max=1.0)


def test_stability_report_stable_case():
    rng = np.random.default_rng(39)
    A = random_psd_operator(rng, 12, 800.0)
    report = stability_report(A, PARAMS, n_max=500)
    verdict = samarskii_check(PARAMS, A.lambda_max)
    assert report.stable == verdict.stable
    assert report.tau_bound == verdict.tau_bound
    assert len(report.per_mode) == 12
    assert report.max_power_norm >= 1.0
    for mode in report.per_mode:
        if mode.lam > 0:
            assert max(abs(mode.xi1), abs(mode.xi2)) < 1.0


def test_stability_report_unstable_case():
    A = scalar_problem(1000.0)
    params = HMParams(tau=1e-3, eps=2e-4)
    report = stability_report(A, params, n_max=50)
    assert not report.stable
    assert report.margin < 0
    assert report.max_power_norm > 1e3


def test_proposition3_sample():
    for et in (2.0 / 3.0, ET):
        for mu in np.linspace(8 * et / 300, 8 * et, 300):
            eig = block_eigenvalues(float(mu), et)
            inside = max(abs(eig.xi1), abs(eig.xi2)) < 1.0 - 1e-10
            assert inside == (mu < 4 * et - 1e-10)
