import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from weylsym.classify import (
    ClassifyOptions, boundary_limit_L, classify_point, eigen_data, laurent_coeffs, scan_spectrum, tau_increment,
    transform_alpha,
)
from weylsym.core import BoundaryMatrix, random_boundary
from weylsym.errors import PoleOfTransform
from weylsym.herglotz import HerglotzModel, StepSpectralFunction
from weylsym.models import one_jump_synthetic, oscillator_model, random_system
from weylsym.oracle import jacobi_truncation_eigs
from weylsym.weyl import WeylFunction


@pytest.fixture(scope="module")
def osc_oracle():
    """Lowest eigenvalues and first eigenvector components of the size-2000 truncation."""
    size = 2000
    t, v = eigh_tridiagonal(np.arange(1, size + 1, dtype=float), np.ones(size - 1), select="i", select_range=(0, 4))
    return t, v[0] ** 2


def test_boundary_limit_free_jacobi(fj, dirichlet):
    assert np.abs(boundary_limit_L(fj, dirichlet, 0.0).L).max() < 1e-4
    assert np.abs(boundary_limit_L(fj, dirichlet, 3.0).L).max() < 1e-6


def test_boundary_limit_exact_jump():
    bl = boundary_limit_L(one_jump_synthetic(1.0, 0.0), None, 0.0)
    assert abs(bl.L[0, 0] - 1j) < 1e-6
    with pytest.raises(ValueError):
        boundary_limit_L(one_jump_synthetic(), None, 0.0, schedule=(0.1, 1.5, 4))


def test_laurent_exact_model():
    m = HerglotzModel(StepSpectralFunction([0.0], [1.0]), M0=0.5)
    K = laurent_coeffs(m, None, 0.0)
    assert abs(K[-1][0, 0] + 1) < 1e-12
    assert abs(K[0][0, 0] - 0.5) < 1e-12
    assert abs(K[1][0, 0]) < 1e-12


def test_classify_free_jacobi(fj, dirichlet):
    r = classify_point(fj, dirichlet, 0.0)
    assert r.verdict == "Continuous"
    assert abs(r.density_hat[0, 0] - 1.0) < 1e-3
    r = classify_point(fj, dirichlet, 3.0)
    assert r.verdict == "Resolvent"
    assert abs(r.density_hat[0, 0]) < 1e-6


def test_classify_one_jump():
    r = classify_point(one_jump_synthetic(1.0, 0.0), None, 0.0)
    assert r.verdict == "DiscreteEigenvalue"
    assert abs(r.K_minus1[0, 0] + 1) < 1e-6


def test_oscillator_lowest_eigenvalue(osc, dirichlet, osc_oracle):
    t, c = osc_oracle
    r = classify_point(osc, dirichlet, t[0])
    assert r.verdict == "DiscreteEigenvalue"
    assert abs(r.diagnostics["lambda_star"] - t[0]) < 1e-6
    K = r.K_minus1[0, 0].real
    assert K < 0
    # |Zt|^2 = 1 / v_1^2 for the eigenvector normalised by the oracle
    assert abs(K / c[0] + 1) < 1e-4
    ed = eigen_data(osc, dirichlet, r.diagnostics["lambda_star"], r.K_minus1)
    assert abs(ed.gram[0, 0].real + K) < 1e-4 * abs(K)
    assert ed.boundary_residual < 1e-12


def test_tau_increments(fj, dirichlet):
    ref = (np.sqrt(3) + 2 * np.pi / 3) / (2 * np.pi)
    assert abs(tau_increment(fj, dirichlet, -1.0, 1.0)[0, 0] - ref) < 1e-3
    assert abs(tau_increment(one_jump_synthetic(1.0, 0.0), None, -0.5, 0.5)[0, 0] - 1) < 1e-6
    with pytest.raises(ValueError):
        tau_increment(fj, dirichlet, 1.0, -1.0)


def test_transform_alpha_scalar(fj):
    ah, a = BoundaryMatrix.from_angle(np.pi / 2), BoundaryMatrix.from_angle(0.0)
    Mh = WeylFunction(fj, ah)(1j)
    assert abs(transform_alpha(Mh, a, ah)[0, 0] - (-1 / Mh[0, 0])) < 1e-12
    assert abs(transform_alpha(Mh, a, ah)[0, 0] - 1j * (np.sqrt(5) + 1) / 2) < 1e-8
    with pytest.raises(PoleOfTransform):
        transform_alpha(np.zeros((1, 1)), a, ah)


def test_transform_alpha_n2(rng):
    sys = random_system(2, rng, length=256)
    a, ah = random_boundary(2, rng), random_boundary(2, rng)
    lam = 0.2 + 0.4j
    M = WeylFunction(sys, a)(lam)
    Mh = WeylFunction(sys, ah)(lam)
    assert np.abs(transform_alpha(Mh, a, ah) - M).max() < 1e-8
    # identity change
    assert np.abs(transform_alpha(M, a, a) - M).max() < 1e-12


def test_scan_free_jacobi(fj, dirichlet):
    sm = scan_spectrum(fj, dirichlet, (-3, 3), 61)
    for t, v in zip(sm.grid, sm.verdicts()):
        if abs(t) < 2 - 1e-9:
            assert v == "Continuous", t
        elif abs(t) > 2 + 1e-9:
            assert v == "Resolvent", t
    assert len(sm.eigenvalues) == 0
    assert sm.undetermined_fraction <= 0.05


def test_scan_oscillator_matches_oracle(osc, dirichlet):
    sm = scan_spectrum(osc, dirichlet, (-1, 4), 51)
    e = jacobi_truncation_eigs(oscillator_model(1.0), 2000)
    e = e[(e > -1) & (e < 4)]
    assert len(sm.eigenvalues) == len(e)
    assert np.abs(sm.eigenvalue_positions - e).max() < 1e-6
    assert set(sm.verdicts()) <= {"Resolvent", "DiscreteEigenvalue"}


def test_options_schedule():
    o = ClassifyOptions(nu0=0.1, ratio=0.5, count=3)
    assert np.allclose(o.schedule(), [0.1, 0.05, 0.025, 0.0125])
