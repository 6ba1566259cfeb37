"""Compiled inner loops for transfer-matrix sweeps.

All routines operate on one chunk of stacked coefficients ``S[k], V[k]``
(local index ``k``) and update their state arrays in place so that long
windows can be processed chunk by chunk.
"""
import numpy as np
from numba import njit

_HI = 1e8
_LO = 1e-8


@njit(cache=True, nogil=True)
def _apply(S, V, lam, k, X, out):
    # out = (S_k + lam V_k) X
    m = X.shape[0]
    c = X.shape[1]
    for i in range(m):
        for j in range(c):
            acc = 0j
            for l in range(m):
                acc += (S[k, i, l] + lam * V[k, i, l]) * X[l, j]
            out[i, j] = acc


@njit(cache=True, nogil=True)
def _apply_inv(S, V, lam, k, X, out):
    # out = -J (S_k + conj(lam) V_k)^* J X, written entrywise:
    # (-J A^* J)[i, j] = s(i) s(j) conj(A[p(j), p(i)])
    m = X.shape[0]
    n = m // 2
    c = X.shape[1]
    lb = np.conj(lam)
    for i in range(m):
        pi = i + n if i < n else i - n
        si = 1.0 if i < n else -1.0
        for j in range(c):
            acc = 0j
            for l in range(m):
                pl = l + n if l < n else l - n
                sl = 1.0 if l < n else -1.0
                a = S[k, pl, pi] + lb * V[k, pl, pi]
                acc += si * sl * np.conj(a) * X[l, j]
            out[i, j] = acc


@njit(cache=True, nogil=True)
def _maxabs(X):
    r = 0.0
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            a = abs(X[i, j])
            if a > r:
                r = a
    return r


@njit(cache=True, nogil=True)
def _gram_add(X, P, k, G, w):
    # G += w * X^* P_k X
    m = X.shape[0]
    c = X.shape[1]
    for a in range(c):
        for b in range(c):
            acc = 0j
            for i in range(m):
                xi = np.conj(X[i, a])
                if xi == 0:
                    continue
                for j in range(m):
                    acc += xi * P[k, i, j] * X[j, b]
            G[a, b] += w * acc


@njit(cache=True, nogil=True)
def _normalize(X, R):
    """Rescale the columns of ``X`` in place so that ``X_old = X_new R``.

    One column: divide by its magnitude when it leaves ``[1e-8, 1e8]``.
    Several columns: modified Gram-Schmidt at every call, which keeps the
    column span resolved when the columns grow at different rates.
    Returns False when ``X`` was left unchanged (``R = I``).
    """
    m = X.shape[0]
    c = X.shape[1]
    for i in range(c):
        for j in range(c):
            R[i, j] = 0j
    if c == 1:
        nrm = _maxabs(X)
        if nrm > _HI or (nrm < _LO and nrm > 0):
            for i in range(m):
                X[i, 0] = X[i, 0] / nrm
            R[0, 0] = nrm
            return True
        R[0, 0] = 1.0
        return False
    for j in range(c):
        for i in range(j):
            d = 0j
            for l in range(m):
                d += np.conj(X[l, i]) * X[l, j]
            R[i, j] = d
            for l in range(m):
                X[l, j] -= d * X[l, i]
        nrm = 0.0
        for l in range(m):
            nrm += X[l, j].real ** 2 + X[l, j].imag ** 2
        nrm = np.sqrt(nrm)
        R[j, j] = nrm
        if nrm > 0:
            for l in range(m):
                X[l, j] = X[l, j] / nrm
    return True


@njit(cache=True, nogil=True)
def _triu_inv(R, Ri):
    c = R.shape[0]
    for i in range(c):
        for j in range(c):
            Ri[i, j] = 0j
    for j in range(c):
        Ri[j, j] = 1.0 / R[j, j]
        for i in range(j - 1, -1, -1):
            acc = 0j
            for l in range(i + 1, j + 1):
                acc += R[i, l] * Ri[l, j]
            Ri[i, j] = -acc / R[i, i]


@njit(cache=True, nogil=True)
def _gram_rescale(G, Ri, tmp):
    # G <- Ri^* G Ri
    c = G.shape[0]
    for i in range(c):
        for j in range(c):
            acc = 0j
            for l in range(c):
                acc += G[i, l] * Ri[l, j]
            tmp[i, j] = acc
    for i in range(c):
        for j in range(c):
            acc = 0j
            for l in range(c):
                acc += np.conj(Ri[l, i]) * tmp[l, j]
            G[i, j] = acc


@njit(cache=True, nogil=True)
def backward(S, V, P, lam, W, logs, G, acc):
    """Sweep ``W <- T_k W`` for ``k = K-1, ..., 0`` for every probe ``W[p]``.

    Single columns are rescaled by a positive scalar when their magnitude
    leaves ``[1e-8, 1e8]``; blocks of several columns are re-orthonormalised
    at every step (``W <- W R^{-1}``, which keeps the span and ``B A^{-1}``).
    ``logs[p]`` accumulates ``log |det R|``.  For the first ``acc`` probes,
    ``G[p] += W_k^* P_k W_k`` in the current units of ``W[p]``.
    """
    K = S.shape[0]
    m = S.shape[1]
    npr = W.shape[0]
    c = W.shape[2]
    T = np.empty((m, m), dtype=np.complex128)
    tmp = np.empty((m, c), dtype=np.complex128)
    R = np.empty((c, c), dtype=np.complex128)
    Ri = np.empty((c, c), dtype=np.complex128)
    Gt = np.empty((c, c), dtype=np.complex128)
    for kk in range(K):
        k = K - 1 - kk
        for i in range(m):
            for j in range(m):
                T[i, j] = S[k, i, j] + lam * V[k, i, j]
        for p in range(npr):
            if c == 1:
                nrm = 0.0
                for i in range(m):
                    a = 0j
                    for l in range(m):
                        a += T[i, l] * W[p, l, 0]
                    tmp[i, 0] = a
                    r = abs(a.real) + abs(a.imag)
                    if r > nrm:
                        nrm = r
                if p < acc:
                    _gram_add(tmp, P, k, G[p], 1.0)
                if nrm > _HI or (nrm < _LO and nrm > 0):
                    for i in range(m):
                        W[p, i, 0] = tmp[i, 0] / nrm
                    if p < acc:
                        G[p, 0, 0] = G[p, 0, 0] / (nrm * nrm)
                    logs[p] += np.log(nrm)
                else:
                    for i in range(m):
                        W[p, i, 0] = tmp[i, 0]
                continue
            for i in range(m):
                for j in range(c):
                    a = 0j
                    for l in range(m):
                        a += T[i, l] * W[p, l, j]
                    tmp[i, j] = a
            if p < acc:
                _gram_add(tmp, P, k, G[p], 1.0)
            _normalize(tmp, R)
            for j in range(c):
                logs[p] += np.log(R[j, j].real)
            if p < acc:
                _triu_inv(R, Ri)
                _gram_rescale(G[p], Ri, Gt)
            for i in range(m):
                for j in range(c):
                    W[p, i, j] = tmp[i, j]


@njit(cache=True, nogil=True)
def backward_store(S, V, lam, W, out, outR):
    """As :func:`backward` for one probe, recording ``out[k] = W_k`` and the factor ``outR[k]``.

    The true solution satisfies ``Y_k = W_k F_k`` with ``F_k = outR[k] F_{k+1}``.
    """
    K = S.shape[0]
    tmp = np.empty_like(W)
    R = np.empty((W.shape[1], W.shape[1]), dtype=np.complex128)
    for kk in range(K):
        k = K - 1 - kk
        _apply(S, V, lam, k, W, tmp)
        _normalize(tmp, R)
        W[:, :] = tmp
        out[k, :, :] = tmp
        outR[k, :, :] = R


@njit(cache=True, nogil=True)
def relative_factors(R, E, s):
    """``E_k exp(s_k) = (R_0 ... R_{k-1})^{-1}`` with ``|E_k| = 1``, for ``k = 0..K``."""
    K = R.shape[0]
    c = R.shape[1]
    Ri = np.empty((c, c), dtype=np.complex128)
    for i in range(c):
        for j in range(c):
            E[0, i, j] = 1.0 if i == j else 0.0
    s[0] = 0.0
    for k in range(1, K + 1):
        _triu_inv(R[k - 1], Ri)
        nrm = 0.0
        for i in range(c):
            for j in range(c):
                a = 0j
                for l in range(c):
                    a += Ri[i, l] * E[k - 1, l, j]
                E[k, i, j] = a
                r = abs(a)
                if r > nrm:
                    nrm = r
        s[k] = s[k - 1]
        if nrm > 0:
            for i in range(c):
                for j in range(c):
                    E[k, i, j] = E[k, i, j] / nrm
            s[k] += np.log(nrm)


@njit(cache=True, nogil=True)
def forward(S, V, lam, Z, out):
    """Unscaled forward sweep; ``out[k] = Z`` after step ``k``.

    Returns the local index where the values stopped being finite, or -1.
    """
    K = S.shape[0]
    tmp = np.empty_like(Z)
    for k in range(K):
        _apply_inv(S, V, lam, k, Z, tmp)
        nrm = _maxabs(tmp)
        if not np.isfinite(nrm) or nrm > 1e300:
            return k
        Z[:, :] = tmp
        out[k, :, :] = tmp
    return -1


@njit(cache=True, nogil=True)
def forward_scaled(S, V, lam, Z, logs):
    """Forward sweep with rescaling as in :func:`backward`; only the final state is kept."""
    K = S.shape[0]
    tmp = np.empty_like(Z)
    R = np.empty((Z.shape[1], Z.shape[1]), dtype=np.complex128)
    for k in range(K):
        _apply_inv(S, V, lam, k, Z, tmp)
        _normalize(tmp, R)
        for j in range(Z.shape[1]):
            logs[0] += np.log(R[j, j].real)
        Z[:, :] = tmp


@njit(cache=True, nogil=True)
def forward_focal(S, V, lam, Z, logs, count):
    """Scaled forward sweep of a scalar real frame counting generalized zeros.

    With ``x_{k+1} = A_k x_k + B_k u_k`` the interval ``(k, k+1]`` holds a
    zero when ``x_{k+1} = 0`` or ``x_k B_k x_{k+1} > 0`` (the sign is fixed
    by the orientation of the backward recursion).
    """
    K = S.shape[0]
    tmp = np.empty_like(Z)
    lb = np.conj(lam)
    for k in range(K):
        _apply_inv(S, V, lam, k, Z, tmp)
        # (0, 1) entry of -J A^* J is -conj(A[0, 1]) for n = 1
        B = -(S[k, 0, 1] + lb * V[k, 0, 1]).real
        x0 = Z[0, 0].real
        x1 = tmp[0, 0].real
        if x0 != 0.0 and (x1 == 0.0 or x0 * B * x1 > 0.0):
            count[0] += 1
        nrm = _maxabs(tmp)
        if nrm > _HI or (nrm < _LO and nrm > 0):
            tmp = tmp / nrm
            logs[0] += np.log(nrm)
        Z[:, :] = tmp
