"""Transfer-matrix stepping, fundamental solutions and Psi-weighted forms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .core import J, BoundaryMatrix, SymplecticSystem, as_boundary, dagger
from .errors import PropagationOverflow

CHUNK = 1 << 14


def transfer(sys: SymplecticSystem, lam: complex, k: int, direction: str = "backward") -> np.ndarray:
    """One-step matrix at index ``k``.

    ``"backward"`` gives ``T_k = S_k + lam V_k`` (maps ``z_{k+1}`` to ``z_k``);
    ``"forward"`` gives its inverse ``-J (S_k + conj(lam) V_k)^* J``.
    """
    S, _, V = sys.at(k)
    Jn = J(sys.n)
    if direction == "backward":
        return S + lam * V
    if direction == "forward":
        return -Jn @ dagger(S + np.conj(lam) * V) @ Jn
    raise ValueError(f"unknown direction {direction!r}")


def chunks(k0: int, k1: int, size: int = CHUNK):
    """Consecutive ``[a, b)`` ranges covering ``[k0, k1)``."""
    a = k0
    while a < k1:
        b = min(a + size, k1)
        yield a, b
        a = b


def propagate_forward(sys: SymplecticSystem, lam: complex, Z0, N: int, start: int = 0) -> np.ndarray:
    """Unscaled forward solution values ``Z_start, ..., Z_{start+N}``.

    Raises
    ------
    PropagationOverflow
        When the values leave the floating point range.
    """
    Z = np.array(Z0, dtype=complex)
    squeeze = Z.ndim == 1
    if squeeze:
        Z = Z[:, None]
    out = np.empty((N + 1,) + Z.shape, dtype=complex)
    out[0] = Z
    lam = complex(lam)
    for a, b in chunks(start, start + N):
        S, _, V = sys.coefficients(a, b)
        bad = _kernels.forward(S, V, lam, Z, out[a - start + 1 : b - start + 1])
        if bad >= 0:
            raise PropagationOverflow(a + bad + 1)
    return out[..., 0] if squeeze else out


def propagate_inhomogeneous(sys: SymplecticSystem, lam: complex, z0, f, N: int) -> np.ndarray:
    """Forward solution of ``z_k = (S_k + lam V_k) z_{k+1} - J Psi_k f_k``.

    ``f`` is indexed from 0 and padded with zeros past its length.
    """
    z = np.array(z0, dtype=complex)
    f = np.asarray(f, dtype=complex)
    out = np.empty((N + 1,) + z.shape, dtype=complex)
    out[0] = z
    Jn = J(sys.n)
    S, P, V = sys.coefficients(0, N)
    lam = complex(lam)
    for k in range(N):
        rhs = z + (Jn @ P[k] @ f[k] if k < len(f) else 0)
        Tinv = -Jn @ dagger(S[k] + np.conj(lam) * V[k]) @ Jn
        z = Tinv @ rhs
        out[k + 1] = z
    return out


@dataclass(frozen=True)
class FundamentalSolution:
    """The pair ``Zhat, Ztilde`` over ``0 <= k <= N`` (arrays of shape ``(N+1, 2n, n)``)."""

    lam: complex
    alpha: BoundaryMatrix
    Zhat: np.ndarray
    Ztilde: np.ndarray
    N: int
    system: SymplecticSystem | None = field(default=None, repr=False, compare=False)

    @property
    def Phi(self) -> np.ndarray:
        return np.concatenate([self.Zhat, self.Ztilde], axis=-1)

    @property
    def n(self) -> int:
        return self.alpha.n


def initial_pair(alpha) -> tuple[np.ndarray, np.ndarray]:
    """``(alpha^*, -J alpha^*)``."""
    a = as_boundary(alpha)
    return a.H.copy(), -J(a.n) @ a.H


def fundamental(sys: SymplecticSystem, alpha, lam: complex, N: int) -> FundamentalSolution:
    """Propagate ``Zhat_0 = alpha^*``, ``Ztilde_0 = -J alpha^*`` forward to index ``N``.

    No rescaling is applied; growth beyond the floating point range raises
    :class:`~weylsym.errors.PropagationOverflow` (an ``OverflowError``).
    """
    a = as_boundary(alpha)
    if a.n != sys.n:
        raise ValueError("alpha and system dimensions differ")
    zh, zt = initial_pair(a)
    Phi = propagate_forward(sys, lam, np.hstack([zh, zt]), N)
    n = sys.n
    Zhat = Phi[:, :, :n].copy()
    Ztilde = Phi[:, :, n:].copy()
    for x in (Zhat, Ztilde):
        x.setflags(write=False)
    return FundamentalSolution(complex(lam), a, Zhat, Ztilde, int(N), sys)


def wronskian_residual(sys: SymplecticSystem, alpha, lam: complex, N: int, relative: bool = True) -> np.ndarray:
    """Per-index ``|Phi_k^*(conj lam) J Phi_k(lam) - J|``.

    With ``relative`` the residual is divided by ``|Phi_k(conj lam)| |Phi_k(lam)|``,
    the natural roundoff scale of the product.
    """
    f1 = fundamental(sys, alpha, lam, N).Phi
    f2 = fundamental(sys, alpha, np.conj(lam), N).Phi
    Jn = J(sys.n)
    r = np.linalg.norm(dagger(f2) @ Jn @ f1 - Jn, ord=2, axis=(-2, -1))
    if relative:
        r = r / np.maximum(1.0, np.linalg.norm(f1, 2, axis=(-2, -1)) * np.linalg.norm(f2, 2, axis=(-2, -1)))
    return r


# --------------------------------------------------------------------------
# Psi-weighted sequences
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedSequence:
    """Matrix values ``values[i]`` at indices ``start + i``, tied to a Psi provider."""

    values: np.ndarray
    psi: object
    start: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 2:
            v = v[:, :, None]
        object.__setattr__(self, "values", v)

    @property
    def stop(self) -> int:
        """One past the last index."""
        return self.start + self.values.shape[0]

    def at(self, k: int) -> np.ndarray:
        return self.values[k - self.start]

    def window(self, k1: int, k2: int) -> np.ndarray:
        if k1 < self.start or k2 >= self.stop:
            raise IndexError(f"window [{k1}, {k2}] outside [{self.start}, {self.stop - 1}]")
        return self.values[k1 - self.start : k2 - self.start + 1]


def psi_values(psi, k1: int, k2: int) -> np.ndarray:
    """Stack ``Psi_k`` for ``k1 <= k <= k2`` from a system or a provider."""
    if isinstance(psi, SymplecticSystem):
        return psi.coefficients(k1, k2 + 1)[1]
    return np.asarray(psi(np.arange(k1, k2 + 1)), dtype=complex)


def gram(psi, values: np.ndarray, k1: int) -> np.ndarray:
    """``sum_k values_k^* Psi_k values_k`` with ``values[0]`` at index ``k1``."""
    if len(values) == 0:
        return np.zeros((values.shape[-1],) * 2, dtype=complex)
    P = psi_values(psi, k1, k1 + len(values) - 1)
    G = np.einsum("kia,kij,kjb->ab", np.conj(values), P, values)
    return 0.5 * (G + dagger(G))


def seminorm(psi, z: WeightedSequence, window=None):
    """Psi-Gram matrix of the columns of ``z`` over ``window = (k1, k2)`` inclusive.

    Returns
    -------
    (ndarray, float)
        The Hermitian Gram matrix and ``sqrt(trace)``, the norm of the column block.
    """
    k1, k2 = window if window is not None else (z.start, z.stop - 1)
    G = gram(psi, z.window(k1, k2), k1)
    return G, float(np.sqrt(max(np.trace(G).real, 0.0)))


def lagrange_defect(sys: SymplecticSystem, lam: complex, nu: complex, z, u, f, g, window) -> np.ndarray:
    """Defect of the extended Lagrange identity on ``window = (s, t)``.

    Returns ``z_k^* J u_k |_s^{t+1} - sum_{k=s}^{t} [(conj(lam) - nu) z^* Psi u
    + f^* Psi u - z^* Psi g]`` where ``z`` solves the system at ``lam`` with
    forcing ``f`` and ``u`` solves it at ``nu`` with forcing ``g``.
    """
    s, t = window

    def arr(x, k1, k2):
        if x is None:
            return None
        return x.window(k1, k2) if isinstance(x, WeightedSequence) else np.asarray(x, dtype=complex)[k1 : k2 + 1]

    Z, U = arr(z, s, t + 1), arr(u, s, t + 1)
    if Z.ndim == 2:
        Z, U = Z[:, :, None], U[:, :, None]
    if Z.shape[:2] != U.shape[:2]:
        raise ValueError("shape mismatch between z and u")
    F = arr(f, s, t)
    Gs = arr(g, s, t)
    if F is not None and F.ndim == 2:
        F = F[:, :, None]
    if Gs is not None and Gs.ndim == 2:
        Gs = Gs[:, :, None]
    Jn = J(sys.n)
    P = sys.coefficients(s, t + 1)[1]
    Zs, Us = Z[:-1], U[:-1]
    total = (np.conj(lam) - nu) * np.einsum("kia,kij,kjb->ab", np.conj(Zs), P, Us)
    if F is not None:
        total = total + np.einsum("kia,kij,kjb->ab", np.conj(F), P, Us)
    if Gs is not None:
        total = total - np.einsum("kia,kij,kjb->ab", np.conj(Zs), P, Gs)
    edge = dagger(Z[-1]) @ Jn @ U[-1] - dagger(Z[0]) @ Jn @ U[0]
    return edge - total
