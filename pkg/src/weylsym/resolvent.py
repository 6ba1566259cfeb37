"""Green's kernel and resolvent application.

With ``Zt`` the solution block satisfying ``alpha Zt_0 = 0`` and ``X`` the
square-summable Weyl block, the kernel is

    G_kj(lam) = Zt_k(lam) X_j(conj lam)^*    for k <= j
    G_kj(lam) = X_k(lam) Zt_j(conj lam)^*    for k >  j

and ``zhat_k = X_k xi + sum_j G_kj Psi_j f_j`` solves the forced system
with ``alpha zhat_0 = xi``.
"""
from __future__ import annotations

import numpy as np

from .core import J, SymplecticSystem, as_boundary, dagger
from .errors import BadInput
from .propagate import WeightedSequence, fundamental, initial_pair, psi_values
from .weyl import DEFAULT_TOL, WeylFunction, decaying_basis


class GreenKernel:
    """Kernel ``G_kj(lam)`` with the four column families cached up to ``size``.

    Parameters
    ----------
    sys, alpha : system and boundary matrix
    lam : complex
        Spectral parameter; real values must lie in a gap where ``M_+`` converges.
    size : int
        Initial cache length of ``X``; both caches grow on demand.  ``X`` is
        taken from the decaying basis, so only ``Zt`` is propagated forward
        and only as far as a ``k <= j`` entry needs it.

    Raises
    ------
    PropagationOverflow
        From an entry whose ``Zt`` factor leaves the floating point range.
    M, M_conj : array_like, optional
        ``M_+(lam)`` and ``M_+(conj lam)``.  Computed when absent.
    """

    def __init__(self, sys: SymplecticSystem, alpha, lam: complex, size: int = 64, M=None, M_conj=None,
                 tol: float = DEFAULT_TOL):
        self.sys = sys
        self.alpha = as_boundary(alpha)
        self.lam = complex(lam)
        wf = None
        if M is None or M_conj is None:
            wf = WeylFunction(sys, self.alpha, tol)
        self.M = np.atleast_2d(np.asarray(M if M is not None else wf(self.lam), complex))
        self.M_conj = np.atleast_2d(np.asarray(M_conj if M_conj is not None else wf(np.conj(self.lam)), complex))
        self._zt_size = -1
        self._x_size = -1
        self._fill(max(int(size), 1), 1)

    def _fill(self, size: int, zt_size: int | None = None):
        """Extend the ``X`` columns to ``size`` and the ``Zt`` columns to ``zt_size`` (default ``size``)."""
        zt_size = size if zt_size is None else zt_size
        lc = np.conj(self.lam)
        if zt_size > self._zt_size:
            zt_size = max(zt_size, 2 * self._zt_size)
            self.Zt = fundamental(self.sys, self.alpha, self.lam, zt_size).Ztilde
            self.Zt_conj = self.Zt if lc == self.lam else fundamental(self.sys, self.alpha, lc, zt_size).Ztilde
            self._zt_size = zt_size
        if size > self._x_size:
            size = max(size, 2 * self._x_size)
            self.X = self._weyl_block(self.lam, self.M, size)
            self.X_conj = self.X if lc == self.lam else self._weyl_block(lc, self.M_conj, size)
            self._x_size = size

    def _weyl_block(self, lam, M, size):
        # decaying basis fitted to the exact value X_0 = alpha^* - J alpha^* M
        zh, zt = initial_pair(self.alpha)
        X0 = zh + zt @ M
        Wv = decaying_basis(self.sys, lam, size).values(ref=0)
        C, *_ = np.linalg.lstsq(Wv[0], X0, rcond=None)
        return Wv @ C

    @property
    def size(self) -> int:
        return min(self._zt_size, self._x_size)

    def __call__(self, k: int, j: int) -> np.ndarray:
        if k <= j:
            self._fill(j, k)
            return self.Zt[k] @ dagger(self.X_conj[j])
        self._fill(k, j)
        return self.X[k] @ dagger(self.Zt_conj[j])


def green(sys: SymplecticSystem, alpha, lam: complex, k: int, j: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Single kernel entry ``G_kj(lam)``."""
    return GreenKernel(sys, alpha, lam, max(k, j), tol=tol)(k, j)


def _as_forcing(sys, f) -> WeightedSequence:
    if isinstance(f, WeightedSequence):
        return f
    v = np.asarray(f, dtype=complex)
    if v.ndim == 1:
        v = v.reshape(-1, 2 * sys.n)
    return WeightedSequence(v, sys, 0)


def resolve(sys: SymplecticSystem, alpha, lam: complex, f, xi=None, N_out: int = 500,
            kernel: GreenKernel | None = None, tol: float = DEFAULT_TOL) -> WeightedSequence:
    """``zhat_k = X_k(lam) xi + sum_j G_kj(lam) Psi_j f_j`` on ``0 <= k <= N_out``.

    ``f`` is a finite sequence of ``2n``-vectors (index 0 upward, or a
    :class:`WeightedSequence` with its own start); the sum runs over its
    support exactly.  The two cumulative sums give every ``zhat_k`` in one
    pass.

    Raises
    ------
    BadInput
        If ``f`` contains non-finite entries.
    NotConverged
        If ``M_+`` does not converge at ``lam`` or ``conj lam``.
    """
    n = sys.n
    fs = _as_forcing(sys, f)
    F = fs.values[..., 0] if fs.values.shape[-1] == 1 else fs.values
    if F.ndim != 2 or F.shape[1] != 2 * n:
        raise BadInput(f"f must hold {2 * n}-vectors")
    if not np.all(np.isfinite(F)):
        raise BadInput("f is not summable: non-finite entries")
    s0, s1 = fs.start, fs.start + F.shape[0]
    top = max(N_out, s1)
    G = kernel if kernel is not None else GreenKernel(sys, alpha, lam, 1, tol=tol)
    G._fill(top + 1, s1)
    xi = np.zeros(n, complex) if xi is None else np.asarray(xi, complex).reshape(n)

    P = psi_values(sys, s0, s1 - 1)
    g = np.einsum("kij,kj->ki", P, F)  # Psi_j f_j
    # right part: sum_{j >= k} X_j(conj lam)^* g_j ; left part: sum_{j < k} Zt_j(conj lam)^* g_j
    right_terms = np.einsum("kia,ki->ka", np.conj(G.X_conj[s0:s1]), g)
    left_terms = np.einsum("kia,ki->ka", np.conj(G.Zt_conj[s0:s1]), g)
    R = np.zeros((top + 2, n), complex)
    Lc = np.zeros((top + 2, n), complex)
    R[s0:s1] = right_terms
    Lc[s0 + 1 : s1 + 1] = left_terms
    R = np.cumsum(R[::-1], axis=0)[::-1]
    Lc = np.cumsum(Lc, axis=0)
    ks = slice(0, N_out + 1)
    z = np.einsum("kia,ka->ki", G.X[ks], xi[None, :] + Lc[ks])
    m = min(N_out + 1, s1)
    z[:m] += np.einsum("kia,ka->ki", G.Zt[:m], R[:m])
    return WeightedSequence(z, sys, 0)


def defect(sys: SymplecticSystem, lam: complex, z: WeightedSequence, f) -> np.ndarray:
    """``|z_k - (S_k + lam V_k) z_{k+1} + J Psi_k f_k|`` for ``k`` in the window of ``z`` (minus one)."""
    n = sys.n
    Z = z.values[..., 0] if z.values.shape[-1] == 1 else z.values
    K = Z.shape[0] - 1
    S, P, V = sys.coefficients(z.start, z.start + K)
    T = S + complex(lam) * V
    r = Z[:-1] - np.einsum("kij,kj->ki", T, Z[1:])
    fs = _as_forcing(sys, f)
    F = fs.values[..., 0] if fs.values.shape[-1] == 1 else fs.values
    lo = max(fs.start, z.start)
    hi = min(fs.start + F.shape[0], z.start + K)
    if hi > lo:
        Fw = F[lo - fs.start : hi - fs.start]
        r[lo - z.start : hi - z.start] += np.einsum("ij,kjl,kl->ki", J(n), P[lo - z.start : hi - z.start], Fw)
    return np.linalg.norm(r, axis=1)


def psi_norm(sys: SymplecticSystem, z) -> float:
    """``||z||_Psi`` over the stored window."""
    zs = _as_forcing(sys, z)
    Z = zs.values[..., 0] if zs.values.shape[-1] == 1 else zs.values
    P = psi_values(sys, zs.start, zs.start + Z.shape[0] - 1)
    return float(np.sqrt(max(np.einsum("ki,kij,kj->", np.conj(Z), P, Z).real, 0.0)))
