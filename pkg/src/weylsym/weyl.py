"""Regular and limiting Weyl-Titchmarsh functions.

``M_N`` is computed from the solution that satisfies the right boundary
condition ``beta z_N = 0``.  That solution is swept backward from ``N`` with
scalar rescaling, which is stable because backward sweeps amplify exactly
the solutions that decay forward.  Writing its value at ``k = 0`` in the
basis ``(alpha^*, -J alpha^*)`` gives ``M_N = B A^{-1}`` with
``A = alpha W_0`` and ``B = alpha J W_0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import J, BoundaryMatrix, SymplecticSystem, as_boundary, dagger, opnorm, random_boundary
from .errors import DegenerateSystem, NotConverged, SingularBoundary
from .propagate import FundamentalSolution, WeightedSequence, chunks, fundamental

DEFAULT_TOL = 1e-10
N_START = 16
N_MAX = 1 << 20


# --------------------------------------------------------------------------
# Backward sweeps
# --------------------------------------------------------------------------

def _sweep(sys: SymplecticSystem, lam: complex, W: np.ndarray, k_hi: int, k_lo: int = 0, gram: int = 0):
    """Sweep probes ``W`` (shape ``(P, 2n, c)``) from index ``k_hi`` down to ``k_lo``.

    Returns the log scales and, for the first ``gram`` probes, the accumulated
    ``sum_{k_lo <= k < k_hi} W_k^* Psi_k W_k`` in the final units of ``W``.
    """
    P = W.shape[0]
    c = W.shape[2]
    logs = np.zeros(P)
    G = np.zeros((P, c, c), complex)
    lam = complex(lam)
    spans = list(chunks(k_lo, k_hi))
    for a, b in reversed(spans):
        S, Psi, V = sys.coefficients(a, b)
        _kernels.backward(S, V, Psi, lam, W, logs, G, int(gram))
    return logs, G


def _boundary_coords(alpha: BoundaryMatrix, W0: np.ndarray):
    """``(alpha W_0, alpha J W_0)`` for each probe."""
    a = alpha.matrix
    aJ = a @ J(alpha.n)
    return a @ W0, aJ @ W0


def _singular(A, B, tol):
    if A.shape == (1, 1):
        return abs(A[0, 0]) <= tol * np.hypot(abs(A[0, 0]), abs(B[0, 0]))
    s = np.linalg.svd(A, compute_uv=False)
    big = np.linalg.norm(np.vstack([A, B]), 2)
    return s[-1] <= tol * big


def _regular_many(sys, alpha, betas, lam, N, tol):
    n = sys.n
    Jn = J(n)
    W = np.stack([Jn @ b.H for b in betas]).astype(complex)
    _, G = _sweep(sys, lam, W, N, 0, gram=1)
    out = []
    for p in range(len(betas)):
        A, B = _boundary_coords(alpha, W[p])
        if _singular(A, B, tol):
            out.append(None)
            continue
        C = np.linalg.inv(A)
        M = B @ C
        res = np.nan
        if p == 0:
            gr = dagger(C) @ G[p] @ C
            res = opnorm((M - dagger(M)) - (lam - np.conj(lam)) * gr)
        out.append((M, res))
    return out


def regular_m(sys: SymplecticSystem, alpha, beta, lam: complex, N: int, tol: float = DEFAULT_TOL,
              full: bool = False):
    """Regular Weyl-Titchmarsh function ``M_N = -[beta Zt_N]^{-1} beta Zh_N``.

    Parameters
    ----------
    full : bool
        Also return the circle residual
        ``|(M - M^*) - (lam - conj lam) sum_{k<N} X_k^* Psi_k X_k|`` where
        ``X = Zh + Zt M``.  It vanishes exactly when ``X_N^* J X_N = 0``.

    Raises
    ------
    SingularBoundary
        When ``lam`` is (numerically) an eigenvalue of the finite section.
    """
    alpha, beta = as_boundary(alpha), as_boundary(beta)
    if N < 1:
        raise ValueError("N must be positive")
    r = _regular_many(sys, alpha, [beta], lam, N, tol)[0]
    if r is None:
        raise SingularBoundary(lam, N)
    return (r[0], r[1]) if full else r[0]


# --------------------------------------------------------------------------
# Limiting function
# --------------------------------------------------------------------------

_PROBES: dict = {}


def default_probes(alpha: BoundaryMatrix, seed: int = 0) -> list[BoundaryMatrix]:
    """Right boundary matrices used to bound the Weyl disk."""
    key = (alpha.matrix.tobytes(), alpha.n, seed)
    hit = _PROBES.get(key)
    if hit is None:
        hit = _PROBES[key] = _make_probes(alpha, seed)
    return list(hit)


def _make_probes(alpha, seed):
    n = alpha.n
    if n == 1:
        return [BoundaryMatrix.from_angle(t) for t in (0.0, np.pi / 4, np.pi / 2)]
    rot = (alpha.matrix + alpha.matrix @ J(n)) / np.sqrt(2)
    return [alpha, BoundaryMatrix(rot), random_boundary(n, np.random.default_rng(seed))]


@dataclass
class MPlusEvaluation:
    """Outcome of the adaptive limit ``M_N -> M_+``.

    Attributes
    ----------
    value : ndarray
        Mean over the non-singular probes at ``N_used``.
    diameter : float
        Largest pairwise distance between probe values at ``N_used``.
    on_circle_residual : float
        Circle residual of the first probe at ``N_used`` (NaN if that probe was singular).
    history : list of (N, spread)
    """

    lam: complex
    value: np.ndarray
    N_used: int
    diameter: float
    on_circle_residual: float
    converged: bool
    history: list = field(default_factory=list, repr=False)


def limit_m(sys: SymplecticSystem, alpha, lam: complex, tol: float = DEFAULT_TOL, N_max: int = N_MAX,
            beta_probes=None, N_start: int = N_START, seed: int = 0) -> MPlusEvaluation:
    """Adaptive ``M_+(lam)`` by doubling ``N`` until the probe spread collapses.

    Convergence requires both the spread and the change between successive
    ``N`` to be below ``tol * max(1, |M|)``.  Hitting ``N_max`` returns an
    evaluation with ``converged=False``.
    """
    alpha = as_boundary(alpha)
    betas = list(beta_probes) if beta_probes is not None else default_probes(alpha, seed)
    lam = complex(lam)
    history = []
    prev = None
    N = max(1, int(N_start))
    last = None
    while True:
        res = None
        for bump in range(4):
            res = _regular_many(sys, alpha, betas, lam, N + bump, tol * 1e-3)
            if any(r is not None for r in res):
                N_eff = N + bump
                break
        else:
            raise DegenerateSystem(f"all boundary probes singular near N={N} at lambda={lam!r}")
        good = [r for r in res if r is not None]
        Ms = [r[0] for r in good]
        value = np.mean(Ms, axis=0)
        spread = max((opnorm(a - b) for i, a in enumerate(Ms) for b in Ms[i + 1:]), default=np.inf)
        history.append((N_eff, spread))
        scale = tol * max(1.0, opnorm(value))
        step = opnorm(value - prev) if prev is not None else np.inf
        last = MPlusEvaluation(lam, value, N_eff, float(spread), float(res[0][1]) if res[0] else np.nan,
                               False, history)
        if spread < scale and step < scale:
            last.converged = True
            return last
        if N >= N_max:
            return last
        prev = value
        N = min(2 * N, N_max)


class WeylFunction:
    """``lam -> M_+(lam)`` for a fixed system and left boundary matrix, with memoisation."""

    def __init__(self, sys: SymplecticSystem, alpha, tol: float = DEFAULT_TOL, N_max: int = N_MAX,
                 beta_probes=None, seed: int = 0):
        self.sys = sys
        self.alpha = as_boundary(alpha)
        self.tol = tol
        self.N_max = N_max
        self.beta_probes = beta_probes
        self.seed = seed
        self._memo: dict = {}

    @property
    def n(self) -> int:
        return self.sys.n

    def evaluate(self, lam: complex, N_max: int | None = None, N_start: int = N_START) -> MPlusEvaluation:
        """Memoised :func:`limit_m`; ``N_start`` only warm-starts a fresh evaluation."""
        key = (complex(lam), N_max or self.N_max)
        hit = self._memo.get(key)
        if hit is None:
            hit = limit_m(self.sys, self.alpha, lam, self.tol, key[1], self.beta_probes,
                          N_start=min(N_start, key[1]), seed=self.seed)
            if len(self._memo) < 100_000:
                self._memo[key] = hit
        return hit

    def __call__(self, lam: complex) -> np.ndarray:
        ev = self.evaluate(lam)
        if not ev.converged:
            raise NotConverged(f"M_+ not converged at lambda={complex(lam)!r} (N={ev.N_used})")
        return ev.value


# --------------------------------------------------------------------------
# Weyl solution
# --------------------------------------------------------------------------

@dataclass
class DecayingBasis:
    """Columns spanning the solutions that decay forward, on ``0 <= k <= k_end``.

    ``W[k]`` holds normalised values; the true solution block is
    ``W[k] E[k] exp(logs[k])`` up to one common right factor.
    """

    lam: complex
    W: np.ndarray
    E: np.ndarray
    logs: np.ndarray
    N_used: int

    def values(self, ref: int = 0) -> np.ndarray:
        """Solution block normalised to the stored frame at ``ref`` (``Y_ref = W[ref]``)."""
        f = np.exp(self.logs - self.logs[ref])
        C = self.E @ np.linalg.inv(self.E[ref])
        return (self.W @ C) * f[:, None, None]


def _subspace_gap(A, B):
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    return opnorm(qb - qa @ (dagger(qa) @ qb))


def decaying_basis(sys: SymplecticSystem, lam: complex, k_end: int, tol: float = 1e-12,
                   extra: int = 64, max_extra: int = N_MAX) -> DecayingBasis:
    """Backward-swept basis of the forward-decaying solutions on ``[0, k_end]``.

    Two right boundary conditions are swept from ``k_end + extra`` and
    ``extra`` is doubled until both give the same subspace at ``k_end``.

    Raises
    ------
    NotConverged
        If no decaying subspace emerges within ``max_extra`` steps.
    """
    n = sys.n
    Jn = J(n)
    b1 = np.hstack([np.eye(n), np.zeros((n, n))])
    b2 = np.hstack([np.zeros((n, n)), np.eye(n)])
    start = np.stack([Jn @ dagger(b1), Jn @ dagger(b2)]).astype(complex)
    while True:
        W = start.copy()
        _sweep(sys, lam, W, k_end + extra, k_end)
        if _subspace_gap(W[0], W[1]) < tol:
            break
        if extra >= max_extra:
            raise NotConverged(f"no decaying subspace at lambda={complex(lam)!r}")
        extra *= 2
    w = W[0].copy()
    out = np.empty((k_end + 1, 2 * n, n), complex)
    R = np.empty((k_end, n, n), complex)
    out[k_end] = w
    for a, b in reversed(list(chunks(0, k_end))):
        S, _, V = sys.coefficients(a, b)
        _kernels.backward_store(S, V, complex(lam), w, out[a:b], R[a:b])
    E = np.empty((k_end + 1, n, n), complex)
    logs = np.empty(k_end + 1)
    _kernels.relative_factors(R, E, logs)
    return DecayingBasis(complex(lam), out, E, logs, k_end + extra)


def weyl_solution(fund: FundamentalSolution, M, sys: SymplecticSystem | None = None,
                  switch: float = 1e-6) -> WeightedSequence:
    """``X_k = Zh_k + Zt_k M`` over the window of ``fund``.

    The literal combination loses relative accuracy once ``X_k`` is much
    smaller than ``Phi_k``.  When ``|X_k| < switch * |Phi_k| |(I, M)|`` the
    remaining values are continued along the decaying subspace, matched to
    the literal value at the switch index.
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    X = fund.Zhat + fund.Ztilde @ M
    sys = sys or fund.system
    if sys is None:
        return WeightedSequence(X, None)
    scale = np.linalg.norm(np.vstack([np.eye(M.shape[0]), M]), 2)
    phin = np.linalg.norm(fund.Phi, 2, axis=(-2, -1))
    xn = np.linalg.norm(X, 2, axis=(-2, -1))
    low = np.nonzero(xn < switch * phin * scale)[0]
    if low.size:
        ks = int(low[0])
        try:
            basis = decaying_basis(sys, fund.lam, fund.N)
        except NotConverged:
            return WeightedSequence(X, sys)
        Wv = basis.values(ref=ks)
        C, *_ = np.linalg.lstsq(Wv[ks], X[ks], rcond=None)
        X = X.copy()
        X[ks:] = Wv[ks:] @ C
    return WeightedSequence(X, sys)


def weyl_sequence(sys: SymplecticSystem, alpha, lam: complex, N: int, M=None, tol: float = DEFAULT_TOL):
    """Convenience: ``X^+`` on ``[0, N]`` built from ``M_+`` (computed if absent)."""
    alpha = as_boundary(alpha)
    if M is None:
        M = WeylFunction(sys, alpha, tol)(lam)
    return weyl_solution(fundamental(sys, alpha, lam, N), M, sys)


def weyl_sequence_stable(sys: SymplecticSystem, alpha, lam: complex, N: int) -> WeightedSequence:
    """``X^+`` on ``[0, N]`` entirely from the decaying basis, normalised by ``alpha X_0 = I``."""
    alpha = as_boundary(alpha)
    basis = decaying_basis(sys, lam, N)
    Wv = basis.values(ref=0)
    C = np.linalg.inv(alpha.matrix @ Wv[0])
    return WeightedSequence(Wv @ C, sys)


# --------------------------------------------------------------------------
# Limit-point diagnosis
# --------------------------------------------------------------------------

@dataclass
class LimitPointReport:
    probes: list
    summable_counts: list
    cross_wronskians: list
    verdict: str


def _dyadic_increments(values, psi_vals):
    """Column-wise Psi-norm sums over ``[2^j, 2^{j+1})`` for ``j >= 0``."""
    d = np.einsum("kia,kij,kja->ka", np.conj(values), psi_vals, values).real
    K = len(d)
    out = []
    j = 0
    while (1 << (j + 1)) <= K:
        out.append(d[1 << j : 1 << (j + 1)].sum(axis=0))
        j += 1
    return np.array(out), d.sum(axis=0)


def _summable(inc, total, tol):
    if inc.shape[0] < 3 or total <= 0:
        return False
    a, b, c = inc[-3:]
    return bool(b <= a / 2 and c <= b / 2 and c < tol * (1 + total))


def diagnose_limit_point(sys: SymplecticSystem, probes, N: int = 1024, tol: float = 1e-8,
                         alpha=None) -> LimitPointReport:
    """Count Psi-summable solution directions at each probe.

    Tests the ``n`` decaying-basis columns and the ``n`` columns of ``Zt``
    by dyadic tail decay, and the cross terms ``X_N^*(nu) J X_N(sigma)``
    between probes.  The verdict is ``"LimitPoint"`` when every probe shows
    exactly ``n`` summable directions and every cross term is below ``tol``;
    otherwise ``"Inconclusive"``.
    """
    n = sys.n
    alpha = as_boundary(alpha) if alpha is not None else BoundaryMatrix(np.hstack([np.eye(n), np.zeros((n, n))]))
    P = sys.coefficients(0, N + 1)[1]
    counts, xs, ok = [], [], True
    for lam in probes:
        cnt = 0
        try:
            X = weyl_sequence_stable(sys, alpha, lam, N).values
        except (NotConverged, np.linalg.LinAlgError):
            X = None
        if X is not None:
            inc, tot = _dyadic_increments(X, P)
            cnt += sum(_summable(inc[:, i], tot[i], tol) for i in range(n))
        try:
            Zt = fundamental(sys, alpha, lam, N).Ztilde
            inc, tot = _dyadic_increments(Zt, P)
            cnt += sum(_summable(inc[:, i], tot[i], tol) for i in range(n))
        except OverflowError:
            pass
        counts.append(int(cnt))
        xs.append(X[-1] if X is not None else None)
        ok = ok and cnt == n and X is not None
    cross = []
    Jn = J(n)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            if xs[i] is None or xs[j] is None:
                cross.append(np.inf)
            else:
                cross.append(opnorm(dagger(xs[i]) @ Jn @ xs[j]))
    ok = ok and all(c < tol for c in cross)
    return LimitPointReport(list(probes), counts, cross, "LimitPoint" if ok else "Inconclusive")
