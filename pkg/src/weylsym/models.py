"""Model builders: Jacobi operators in symplectic form and canned test systems."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Affine, Const, J, SymplecticSystem, Table, BoundaryMatrix, dagger, hermitian_part
from .errors import BadModel, BadInput
from .herglotz import HerglotzModel, StepSpectralFunction

_EAGER_CHECK = 1024


def _seq(x):
    return x if callable(x) else Const(float(x))


@dataclass(frozen=True)
class JacobiModel:
    """Three-term recurrence ``a_k y_k + b_{k+1} y_{k+1} + a_{k+1} y_{k+2} = lam w_{k+1} y_{k+1}``.

    ``a``, ``b``, ``w`` are real sequences indexed by ``k >= 0`` (callables on
    integer arrays, or numbers for constants).  The spectral relation holds
    for ``k >= 1``; ``y_0`` is governed by the boundary matrix.
    """

    a: object
    b: object
    w: object
    label: str = ""

    def __post_init__(self):
        for name in ("a", "b", "w"):
            object.__setattr__(self, name, _seq(getattr(self, name)))
        k = np.arange(_EAGER_CHECK)
        self.check(k)

    def check(self, k):
        a = np.asarray(self.a(k), dtype=float)
        w = np.asarray(self.w(k), dtype=float)
        bad = np.nonzero(a == 0)[0]
        if bad.size:
            raise BadModel(int(k[bad[0]]), f"a_k = 0 at k={int(k[bad[0]])}")
        bad = np.nonzero(~(w > 0))[0]
        if bad.size:
            raise BadModel(int(k[bad[0]]), f"w_k <= 0 at k={int(k[bad[0]])}")


def jacobi_to_symplectic(m: JacobiModel) -> SymplecticSystem:
    """State ``z_k = (y_k, -a_k y_{k+1})``.

    ``S_k = [[-b_{k+1}/a_k, 1/a_k], [-a_k, 0]]`` and
    ``Psi_k = diag(0, w_{k+1}/a_k^2)``, so that ``alpha = (1, 0)`` imposes
    ``y_0 = 0`` and ``|z|_Psi^2 = sum_{k>=0} w_{k+1} |y_{k+1}|^2``.
    """

    def coeffs(k):
        a = np.asarray(m.a(k), dtype=float)
        if np.any(a == 0):
            raise BadModel(int(k[np.nonzero(a == 0)[0][0]]))
        return a, np.asarray(m.b(k + 1), dtype=float), np.asarray(m.w(k + 1), dtype=float)

    def S(k):
        a, b, _ = coeffs(k)
        out = np.zeros(k.shape + (2, 2))
        out[:, 0, 0] = -b / a
        out[:, 0, 1] = 1.0 / a
        out[:, 1, 0] = -a
        return out

    def Psi(k):
        a, _, w = coeffs(k)
        out = np.zeros(k.shape + (2, 2))
        out[:, 1, 1] = w / (a * a)
        return out

    return SymplecticSystem(1, S, Psi, label=m.label or "jacobi")


def free_jacobi() -> SymplecticSystem:
    sys = jacobi_to_symplectic(JacobiModel(1.0, 0.0, 1.0, label="free_jacobi"))
    return sys


def oscillator_model(c: float = 1.0) -> JacobiModel:
    return JacobiModel(1.0, Affine(0.0, float(c)), 1.0, label=f"oscillator({c:g})")


def oscillator(c: float = 1.0) -> SymplecticSystem:
    """``a = 1``, ``b_k = c k``, ``w = 1``; purely discrete spectrum for ``c > 0``."""
    return jacobi_to_symplectic(oscillator_model(c))


def one_jump_synthetic(c: float = 1.0, t0: float = 0.0) -> HerglotzModel:
    """``M(lam) = c / (t0 - lam) - c t0 / (1 + t0^2)``: a single jump ``c`` at ``t0``."""
    tau = StepSpectralFunction([t0], [c])
    return HerglotzModel(tau, label=f"one_jump_synthetic({c:g}, {t0:g})")


_BUILTINS = {
    "free_jacobi": free_jacobi,
    "oscillator": oscillator,
    "one_jump_synthetic": one_jump_synthetic,
}


def builtin(name: str, **params):
    """Canned model by name: ``free_jacobi``, ``oscillator(c)``, ``one_jump_synthetic(c, t0)``."""
    try:
        make = _BUILTINS[name]
    except KeyError:
        raise BadInput(f"unknown builtin model {name!r}") from None
    return make(**params)


# --------------------------------------------------------------------------
# Random and composite systems
# --------------------------------------------------------------------------

def _rand_herm(n, rng, scale):
    return scale * hermitian_part(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def _random_symplectic(n, rng, scale):
    I = np.eye(n)
    Z = np.zeros((n, n))
    shear_up = np.block([[I, _rand_herm(n, rng, scale)], [Z, I]])
    shear_lo = np.block([[I, Z], [_rand_herm(n, rng, scale), I]])
    A = I + scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    dil = np.block([[A, Z], [Z, dagger(np.linalg.inv(A))]])
    return shear_up @ dil @ shear_lo @ J(n)


def random_system(n: int, rng: np.random.Generator, length: int = 1024, scale: float = 0.1,
                  label: str = "random") -> SymplecticSystem:
    """Tabulated system with random symplectic ``S_k`` and random admissible ``Psi_k``.

    ``S_k`` is a product of Hermitian shears, a block dilation and ``J``;
    ``Psi_k = R diag(D, 0) R^*`` with ``R`` symplectic and ``D >= 0``, which
    makes ``Psi_k J Psi_k = 0``.  Indices past ``length`` repeat the last entry.
    """
    S = np.empty((length, 2 * n, 2 * n), complex)
    P = np.empty_like(S)
    for k in range(length):
        S[k] = _random_symplectic(n, rng, scale)
        R = _random_symplectic(n, rng, scale)
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        D = scale * (G @ dagger(G)) / n
        Dfull = np.zeros((2 * n, 2 * n), complex)
        Dfull[:n, :n] = D
        P[k] = hermitian_part(R @ Dfull @ dagger(R))
    return SymplecticSystem(n, Table(S), Table(P), label=label)


def _embed(blocks):
    """Direct sum respecting the ``(x, u)`` splitting of each summand."""
    ns = [b.shape[-1] // 2 for b in blocks]
    n = sum(ns)
    K = blocks[0].shape[0]
    out = np.zeros((K, 2 * n, 2 * n), complex)
    off = 0
    for b, m in zip(blocks, ns):
        idx = np.r_[off : off + m, n + off : n + off + m]
        out[:, idx[:, None], idx[None, :]] = b
        off += m
    return out


def direct_sum(*systems: SymplecticSystem) -> SymplecticSystem:
    """Block-diagonal combination; the spectrum is the union of the summands'."""
    n = sum(s.n for s in systems)

    def S(k):
        return _embed([np.asarray(s.S(k), complex) for s in systems])

    def Psi(k):
        return _embed([np.asarray(s.Psi(k), complex) for s in systems])

    return SymplecticSystem(n, S, Psi, label=" + ".join(s.label for s in systems))


def direct_sum_boundary(*alphas) -> BoundaryMatrix:
    mats = [np.asarray(a.matrix if isinstance(a, BoundaryMatrix) else a, complex) for a in alphas]
    ns = [m.shape[0] for m in mats]
    n = sum(ns)
    out = np.zeros((n, 2 * n), complex)
    off = 0
    for m, k in zip(mats, ns):
        out[off : off + k, off : off + k] = m[:, :k]
        out[off : off + k, n + off : n + off + k] = m[:, k:]
        off += k
    return BoundaryMatrix(out)
