import numpy as np
import pytest
from scipy.integrate import quad

from weylsym.errors import PoleError
from weylsym.herglotz import HerglotzModel, StepSpectralFunction, herglotz_eval, semicircle_m, semicircle_part


def test_step_function():
    tau = StepSpectralFunction([2.0, -1.0], [0.25, 0.5])
    assert np.array_equal(tau.breakpoints, [-1.0, 2.0])
    assert tau(-2)[0, 0] == 0
    assert tau(-1)[0, 0] == 0.5
    assert tau(5)[0, 0] == 0.75
    assert tau.jump(2.0)[0, 0] == 0.25
    assert tau.jump(0.0)[0, 0] == 0
    with pytest.raises(ValueError):
        StepSpectralFunction([0.0], [-1.0])
    with pytest.raises(ValueError):
        StepSpectralFunction([0.0, 0.0], [1.0, 1.0])


def test_herglotz_eval_rational_form():
    tau = StepSpectralFunction([0.0], [1.0])
    lam = 0.3 + 0.7j
    assert abs(herglotz_eval(tau, 0, 0, lam)[0, 0] - (-1 / lam)) < 1e-15
    assert abs(herglotz_eval(tau, 2.0, 0.5, lam)[0, 0] - (2 + 0.5 * lam - 1 / lam)) < 1e-15
    with pytest.raises(PoleError):
        herglotz_eval(tau, 0, 0, 0.0)


def test_herglotz_is_nevanlinna():
    tau = StepSpectralFunction([-1.0, 0.0, 2.0], [0.5, 1.0, 0.25])
    m = HerglotzModel(tau, ac=semicircle_part(0.3))
    for lam in (0.1 + 1e-3j, -3 + 2j, 5 + 0.1j):
        v = m(lam)[0, 0]
        assert v.imag > 0
        assert abs(m(np.conj(lam))[0, 0] - np.conj(v)) < 1e-14


def test_semicircle_matches_stieltjes_integral():
    # m(lam) = int rho(t) / (t - lam) dt with rho = sqrt(4 - t^2) / (2 pi)
    for lam in (0.5 + 0.5j, -1.5 + 0.2j, 3.0 + 1.0j):
        def part(t, f):
            return f(np.sqrt(4 - t * t) / (2 * np.pi) / (t - lam))

        ref = quad(part, -2, 2, args=(np.real,), epsabs=1e-13)[0] + 1j * quad(part, -2, 2, args=(np.imag,),
                                                                               epsabs=1e-13)[0]
        assert abs(semicircle_m(lam) - ref) < 1e-9


def test_semicircle_boundary_values():
    assert abs(semicircle_m(0.0) - 1j) < 1e-15
    assert abs(semicircle_m(3.0) - (np.sqrt(5) - 3) / 2) < 1e-15
    assert abs(semicircle_m(1.0 + 1e-12j) - semicircle_m(1.0)) < 1e-9
