import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chi_spt.errors import CertificateError
from chi_spt.lyapunov import (
    CompositeCertificate, LyapunovCertificate, QuadraticForm, boundary_map, build_certificates,
    check_full_system_stability, compose_certificates, decrease_factor, reduced_map, sandwich_bounds,
    solve_discrete_lyapunov,
)
from chi_spt.model import Box, parse_system_config


def test_sandwich_examples():
    assert sandwich_bounds(QuadraticForm(np.eye(2))) == (1.0, 1.0)
    assert sandwich_bounds(QuadraticForm(np.diag([1.0, 4.0]))) == (1.0, 4.0)
    with pytest.raises(CertificateError):
        sandwich_bounds(QuadraticForm([[0.0, 1.0], [1.0, 0.0]]))


def test_asymmetric_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        QuadraticForm([[2.0, 0.1], [0.0, 2.0]])


spd = st.lists(st.floats(-2, 2), min_size=4, max_size=4).map(
    lambda v: (lambda B: B @ B.T + 0.1 * np.eye(2))(np.array(v).reshape(2, 2))
)


@given(spd, st.floats(0.01, 100))
def test_sandwich_scale_equivariance(P, c):
    P = 0.5 * (P + P.T)
    lo, hi = sandwich_bounds(QuadraticForm(P))
    clo, chi = sandwich_bounds(QuadraticForm(c * P))
    assert clo == pytest.approx(c * lo, rel=1e-9)
    assert chi == pytest.approx(c * hi, rel=1e-9)


def test_decrease_factor_examples(lin1):
    V = QuadraticForm([[1.0]])
    sigma_r = decrease_factor(V, reduced_map(lin1), lin1.domain_x, 500, 42)
    assert sigma_r == pytest.approx(0.9025, abs=1e-12)
    assert decrease_factor(V, lambda u: u, lin1.domain_x, 50, 1) == 1.0
    sigma_b = decrease_factor(V, boundary_map(lin1), lin1.domain_z, 500, 43, lin1.domain_x)
    assert sigma_b == pytest.approx(0.25, abs=1e-12)


def test_decrease_factor_errors():
    V = QuadraticForm([[1.0]])
    with pytest.raises(ValueError):
        decrease_factor(V, lambda u: u, Box([-1.0], [1.0]), 0, 1)
    with pytest.raises(ValueError):
        decrease_factor(V, lambda u: u, Box([0.0], [0.0]), 5, 1)


def test_decrease_factor_linear_limit():
    """Sampled max converges to lambda_max(P^-1/2 A^T P A P^-1/2)."""
    A = np.array([[0.6, 0.3], [-0.2, 0.5]])
    P = np.array([[2.0, 0.3], [0.3, 1.0]])
    w, U = np.linalg.eigh(P)
    P_inv_half = U @ np.diag(w ** -0.5) @ U.T
    expected = np.linalg.eigvalsh(P_inv_half @ A.T @ P @ A @ P_inv_half)[-1]
    got = decrease_factor(QuadraticForm(P), lambda u: A @ u, Box([-1.0, -1.0], [1.0, 1.0]), 40000, 5)
    assert got == pytest.approx(expected, abs=1e-6)
    assert got <= expected + 1e-12
    # scalar case: exact
    assert decrease_factor(QuadraticForm([[3.0]]), lambda u: 0.7 * u, Box([-1.0], [1.0]), 10, 0) == pytest.approx(0.49, abs=1e-15)


def test_compose_example():
    cx = LyapunovCertificate(1.0, 2.0, 0.9, "reduced")
    cy = LyapunovCertificate(0.5, 4.0, 0.25, "boundary")
    assert compose_certificates(cx, cy) == CompositeCertificate(0.5, 4.0, 0.9)
    same = compose_certificates(cx, LyapunovCertificate(1.0, 2.0, 0.9, "boundary"))
    assert (same.gamma_lo, same.gamma_hi, same.sigma) == (1.0, 2.0, 0.9)
    with pytest.raises(ValueError):
        compose_certificates(cy, cx)


def test_sigma_one_has_no_certificate():
    with pytest.raises(CertificateError):
        LyapunovCertificate(1.0, 2.0, 1.0, "reduced")
    with pytest.raises(CertificateError):
        CompositeCertificate(1.0, 2.0, 1.0)


pos = st.floats(1e-3, 1e3)
sig = st.floats(1e-3, 0.999)


@given(pos, pos, sig, pos, pos, sig)
def test_compose_is_min_max(a, b, s1, c, d, s2):
    cx = LyapunovCertificate(min(a, b), max(a, b), s1, "reduced")
    cy = LyapunovCertificate(min(c, d), max(c, d), s2, "boundary")
    out = compose_certificates(cx, cy)
    assert out.gamma_lo == min(min(a, b), min(c, d))
    assert out.gamma_hi == max(max(a, b), max(c, d))
    assert out.sigma == max(s1, s2)


def test_lyapunov_examples():
    np.testing.assert_array_equal(solve_discrete_lyapunov(np.zeros((2, 2))).P, np.eye(2))
    assert solve_discrete_lyapunov([[0.5]]).P[0, 0] == pytest.approx(4 / 3, rel=1e-14)
    with pytest.raises(CertificateError):
        solve_discrete_lyapunov([[1.1]])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=9, max_size=9), st.floats(0.05, 0.95))
def test_lyapunov_solution_certifies_input(entries, radius):
    A = np.array(entries).reshape(3, 3)
    r = max(abs(np.linalg.eigvals(A)))
    if r == 0:
        return
    A = A * (radius / r)
    V = solve_discrete_lyapunov(A)
    assert np.linalg.norm(A.T @ V.P @ A - V.P + np.eye(3)) <= 1e-10
    assert decrease_factor(V, lambda u: A @ u, Box(-np.ones(3), np.ones(3)), 200, 0) < 1.0


def test_build_certificates_lin1(lin1):
    bundle = build_certificates(lin1)
    assert bundle.A_reduced[0, 0] == pytest.approx(0.95, abs=1e-8)
    assert bundle.A_boundary[0, 0] == pytest.approx(0.5, abs=1e-8)
    assert bundle.composite.sigma == pytest.approx(0.9025, abs=1e-12)
    assert bundle.composite.gamma_lo == pytest.approx(4 / 3, rel=1e-6)


def test_build_certificates_sat1_and_coupled(sat1, coupled2):
    for sys in (sat1, coupled2):
        bundle = build_certificates(sys, 300)
        assert 0 < bundle.composite.sigma < 1


def test_build_certificates_unstable(unstable_boundary):
    # h = 0 here, so the reduced map is the identity and fails first
    with pytest.raises(CertificateError, match="reduced model: spectral radius 1"):
        build_certificates(unstable_boundary)
    # stable reduced model (x -> 0.975 x) over an expanding boundary layer
    sys = parse_system_config("n_x = 1\nm_z = 1\nmu = 0.1\nf1 = -w1\ng1 = -0.25*x1 + 2*z1 + w1\n")
    with pytest.raises(CertificateError, match="boundary model: spectral radius 2"):
        build_certificates(sys)


def test_full_system_stability(lin1, unstable_boundary):
    comp = build_certificates(lin1).composite
    rep = check_full_system_stability(lin1, comp, N=2000)
    assert rep.passed
    rhos = [t["rho"] for t in rep.trajectories if not t["trivial"]]
    assert len(rhos) == 8 and max(rhos) <= 0.96
    assert sum(t["trivial"] for t in rep.trajectories) == 1

    bad = check_full_system_stability(unstable_boundary, comp, N=2000)
    assert not bad.passed
    assert any(t["diverged_at"] is not None for t in bad.trajectories)


def test_full_system_stability_rejects_outside_grid(lin1):
    comp = CompositeCertificate(1.0, 2.0, 0.5)
    with pytest.raises(ValueError):
        check_full_system_stability(lin1, comp, [(np.array([5.0]), np.array([0.0]))])
