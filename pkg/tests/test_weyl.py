import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from weylsym.core import BoundaryMatrix, dagger, imag_part, random_boundary
from weylsym.errors import NotConverged, SingularBoundary
from weylsym.models import direct_sum, direct_sum_boundary, oscillator, random_system
from weylsym.propagate import seminorm
from weylsym.weyl import (
    WeylFunction, decaying_basis, diagnose_limit_point, limit_m, regular_m, weyl_sequence, weyl_sequence_stable,
)


def cf_free_jacobi(lam: complex, iters: int = 20000) -> complex:
    """Fixed point of ``m = -1/(lam + m)`` by plain iteration."""
    m = 0j
    for _ in range(iters):
        m = -1.0 / (lam + m)
    return m


def test_regular_m_hand_values(fj, dirichlet):
    assert regular_m(fj, dirichlet, dirichlet, 0.0, 1)[0, 0] == 0
    with pytest.raises(SingularBoundary):
        regular_m(fj, dirichlet, dirichlet, 0.0, 2)


@pytest.mark.parametrize("lam", [1j, 2j, 0.5 + 0.1j, -1.3 + 0.02j])
def test_limit_m_free_jacobi_matches_continued_fraction(fj, dirichlet, lam):
    ev = limit_m(fj, dirichlet, lam)
    assert ev.converged
    assert abs(ev.value[0, 0] - cf_free_jacobi(lam)) < 1e-8


def test_closed_forms(fj, dirichlet):
    wf = WeylFunction(fj, dirichlet)
    assert abs(wf(1j)[0, 0] - 1j * (np.sqrt(5) - 1) / 2) < 1e-9
    assert abs(wf(2j)[0, 0] - 1j * (np.sqrt(2) - 1)) < 1e-9
    assert abs(wf(3.0)[0, 0] - (np.sqrt(5) - 3) / 2) < 1e-9


def test_on_circle_and_nesting(fj, dirichlet):
    probes = [BoundaryMatrix.from_angle(t) for t in (0.0, 0.7, np.pi / 2, 2.2)]
    prev = np.inf
    for N in range(2, 40):
        vals = []
        for b in probes:
            M, res = regular_m(fj, dirichlet, b, 1j, N, full=True)
            assert res < 1e-10
            vals.append(M[0, 0])
        spread = max(abs(x - y) for x in vals for y in vals)
        assert spread <= prev + 1e-12
        prev = spread
    assert prev < 1e-6


def test_memoisation_and_not_converged(fj, dirichlet):
    wf = WeylFunction(fj, dirichlet, N_max=64)
    assert wf.evaluate(1j) is wf.evaluate(1j)
    ev = wf.evaluate(0.5 + 1e-6j)
    assert not ev.converged
    with pytest.raises(NotConverged):
        wf(0.5 + 1e-6j)


def test_nevanlinna_properties_random_n2(rng):
    sys = random_system(2, rng, length=512)
    a = random_boundary(2, rng)
    wf = WeylFunction(sys, a)
    for lam in (0.3 + 0.5j, -1.0 + 0.05j, 2.0 + 1.0j):
        M = wf(lam)
        assert np.linalg.eigvalsh(imag_part(M))[0] > -1e-8
        assert np.abs(wf(np.conj(lam)) - dagger(M)).max() < 1e-9


def test_direct_sum_is_block_diagonal(fj, osc, dirichlet):
    sys = direct_sum(fj, osc)
    a = direct_sum_boundary(dirichlet, dirichlet)
    lam = 0.4 + 0.3j
    M = WeylFunction(sys, a)(lam)
    m1 = WeylFunction(fj, dirichlet)(lam)[0, 0]
    m2 = WeylFunction(osc, dirichlet)(lam)[0, 0]
    assert np.abs(M - np.diag([m1, m2])).max() < 1e-8


def test_weyl_solution_is_summable(fj, dirichlet):
    X = weyl_sequence(fj, dirichlet, 1j, 400)
    G200, _ = seminorm(fj, X, (0, 200))
    G400, _ = seminorm(fj, X, (0, 400))
    assert abs(G400[0, 0] - G200[0, 0]) < 1e-10
    # closed form: X_k components decay like |zeta|^k
    zeta = abs(1j * (np.sqrt(5) - 1) / 2)
    assert abs(X.values[300, 0, 0]) < 10 * zeta ** 300


def test_stable_sequence_matches_literal_where_accurate(osc, dirichlet):
    lam = 1.5 + 0.5j
    X1 = weyl_sequence(osc, dirichlet, lam, 30).values
    X2 = weyl_sequence_stable(osc, dirichlet, lam, 30).values
    scale = np.abs(X1[:10]).max()
    assert np.abs(X1[:10] - X2[:10]).max() < 1e-7 * scale


def test_decaying_basis_solves_system(osc):
    lam = 0.3 + 0.1j
    b = decaying_basis(osc, lam, 50)
    Y = b.values(ref=0)
    S, _, V = osc.coefficients(0, 50)
    for k in range(50):
        r = Y[k] - (S[k] + lam * V[k]) @ Y[k + 1]
        assert np.abs(r).max() < 1e-10 * np.abs(Y[k]).max()


def test_limit_point_diagnosis(fj, osc):
    assert diagnose_limit_point(fj, [1j, 2j, 1 + 1j]).verdict == "LimitPoint"
    assert diagnose_limit_point(osc, [1j], N=256).verdict == "LimitPoint"


def test_limit_m_independent_of_probe_choice(osc, dirichlet):
    lam = 2.2 + 0.3j
    a = limit_m(osc, dirichlet, lam).value
    b = limit_m(osc, dirichlet, lam, beta_probes=[BoundaryMatrix.from_angle(t) for t in (0.1, 1.0, 2.0)]).value
    assert np.abs(a - b).max() < 1e-8


def test_oscillator_m_differences_match_truncated_spectral_sum(osc, dirichlet):
    # M(l1) - M(l2) = sum_j c_j (1/(t_j - l1) - 1/(t_j - l2)), c_j = v_j[0]^2 from the truncated matrix
    size = 400
    d = np.arange(1, size + 1, dtype=float)
    t, v = eigh_tridiagonal(d, np.ones(size - 1))
    c = v[0] ** 2
    wf = WeylFunction(osc, dirichlet)
    for l1, l2 in ((0.5 + 0.2j, 2.5 + 1j), (-1 + 0.01j, 4.2 + 0.3j)):
        ref = np.sum(c * (1 / (t - l1) - 1 / (t - l2)))
        got = wf(l1)[0, 0] - wf(l2)[0, 0]
        assert abs(got - ref) < 1e-8 * max(1.0, abs(ref))
