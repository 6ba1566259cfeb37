"""Spectral classification from the boundary behaviour of ``M_+``.

A real point ``lam0`` is probed along ``lam0 + i nu`` for a geometric
sequence of ``nu``.  The extrapolated limit ``L = lim nu M_+(lam0 + i nu)``
separates poles (``L != 0``) from the rest; for poles an isolation test on
the spectral function separates isolated eigenvalues from embedded ones,
and otherwise the extrapolated ``Im M_+`` separates resolvent points from
continuous spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import minimize_scalar

from .core import J, BoundaryMatrix, SymplecticSystem, as_boundary, dagger, hermitian_part, imag_part, opnorm
from .errors import InconsistentResidue, NotConverged, NotIsolated, PoleOfTransform, WeylError
from .herglotz import HerglotzModel, StepSpectralFunction, herglotz_eval, semicircle_m  # noqa: F401
from .weyl import WeylFunction, decaying_basis, DEFAULT_TOL

VERDICTS = ("Resolvent", "DiscreteEigenvalue", "PointContinuous", "Continuous", "Undetermined")


@dataclass
class ClassifyOptions:
    """Tuning knobs of the classifier.

    ``eps_L_rel`` scales the pole threshold ``eps_L = eps_L_rel (1 + |M_+(lam0 + i nu0)|)``.
    ``step`` is the isolation radius unit: flanks are ``[step, 10 step]`` on each side.
    """

    nu0: float = 0.1
    ratio: float = 0.5
    count: int = 14
    order: int = 4
    tol: float = DEFAULT_TOL
    N_max: int = 1 << 17
    eps_L_rel: float = 1e-6
    eps_im: float = 1e-3
    eps_tau: float = 1e-5
    step: float = 0.02
    Q: int = 64
    rho: float = 0.1
    detect_nu: float = 0.01
    seed: int = 0

    def schedule(self) -> np.ndarray:
        return self.nu0 * self.ratio ** np.arange(self.count + 1)


# --------------------------------------------------------------------------
# M-function sources
# --------------------------------------------------------------------------

class MSource:
    """Uniform access to ``M_+`` for a system (adaptive) or an exact model."""

    def __init__(self, sys, alpha=None, tol: float = DEFAULT_TOL, N_max: int = 1 << 17, seed: int = 0):
        if isinstance(sys, MSource):
            self.__dict__.update(sys.__dict__)
            return
        self.exact = not isinstance(sys, (SymplecticSystem, WeylFunction))
        if isinstance(sys, WeylFunction):
            self.wf = sys
            self.system = sys.sys
            self.alpha = sys.alpha
        elif isinstance(sys, SymplecticSystem):
            self.alpha = as_boundary(alpha)
            self.system = sys
            self.wf = WeylFunction(sys, self.alpha, tol, N_max, seed=seed)
        else:
            self.model = sys
            self.system = None
            self.alpha = None if alpha is None else as_boundary(alpha)
        self.n = sys.n

    def evaluate(self, lam: complex):
        """``(value, converged)``."""
        v, ok, _ = self.evaluate_n(lam)
        return v, ok

    def evaluate_n(self, lam: complex, N_start: int = 16):
        """``(value, converged, N_used)``; exact models report ``N_used = 0``."""
        if self.exact:
            return np.atleast_2d(np.asarray(self.model(complex(lam)), dtype=complex)), True, 0
        ev = self.wf.evaluate(lam, N_start=N_start)
        return ev.value, ev.converged, ev.N_used

    @property
    def N_max(self) -> int:
        return 0 if self.exact else self.wf.N_max

    def __call__(self, lam: complex) -> np.ndarray:
        v, ok = self.evaluate(lam)
        if not ok:
            raise NotConverged(f"M_+ not converged at lambda={complex(lam)!r}")
        return v


def _source(sys, alpha, opts: ClassifyOptions) -> MSource:
    return MSource(sys, alpha, opts.tol, opts.N_max, opts.seed)


# --------------------------------------------------------------------------
# Boundary limits
# --------------------------------------------------------------------------

def _neville(xs, fs):
    """Value at 0 of the polynomial through ``(xs[i], fs[i])``."""
    p = [np.array(f, dtype=complex) for f in fs]
    x = list(xs)
    m = len(x)
    for d in range(1, m):
        for i in range(m - d):
            p[i] = (x[i + d] * p[i] - x[i] * p[i + 1]) / (x[i + d] - x[i])
    return p[0]


def richardson(xs, fs, order: int = 4):
    """Running extrapolants to ``x = 0`` using at most ``order + 1`` trailing nodes."""
    out = []
    for j in range(len(xs)):
        lo = max(0, j - order)
        out.append(_neville(xs[lo : j + 1], fs[lo : j + 1]))
    return out


@dataclass
class BoundaryLimit:
    """Extrapolated ``L = lim nu M(lam0 + i nu)`` and ``D = lim Im M(lam0 + i nu)``."""

    lam0: float
    L: np.ndarray
    residual: float
    D: np.ndarray
    D_residual: float
    nus: np.ndarray
    raw_M: list
    M_ref: float

    @property
    def D_trend(self) -> np.ndarray:
        """``|Im M|`` at the used nodes, largest ``nu`` first."""
        return np.array([opnorm(imag_part(m)) for m in self.raw_M])


def boundary_limit_L(sys, alpha, lam0: float, schedule=None, opts: ClassifyOptions | None = None) -> BoundaryLimit:
    """Richardson limit of ``nu_j M_+(lam0 + i nu_j)`` over ``nu_j = nu0 r^j``.

    Only the prefix of nodes where ``M_+`` converged is used; the residual
    is the difference of the last two extrapolants.

    Raises
    ------
    NotConverged
        If fewer than three nodes converged.
    """
    opts = opts or ClassifyOptions()
    if schedule is not None:
        nu0, r, cnt = schedule
        opts = ClassifyOptions(**{**asdict(opts), "nu0": nu0, "ratio": r, "count": cnt})
    if not (0 < opts.ratio < 1) or opts.nu0 * opts.ratio ** opts.count < 1e-8:
        raise ValueError("schedule must satisfy 0 < r < 1 and nu0 r^J >= 1e-8")
    src = _source(sys, alpha, opts)
    nus, Ms = [], []
    for nu in opts.schedule():
        if nus and not src.exact:
            # the needed N grows like 1/nu; skip nodes that cannot converge
            if N_last * nus[-1] / nu > src.N_max:
                break
        v, ok, N_last = src.evaluate_n(lam0 + 1j * nu, N_start=max(16, N_last // 2) if nus else 16)
        if not ok:
            break
        nus.append(nu)
        Ms.append(v)
    if len(nus) < 3:
        raise NotConverged(f"only {len(nus)} nodes converged at lambda0={lam0!r}")
    nus = np.array(nus)
    Ls = richardson(nus, [nu * m for nu, m in zip(nus, Ms)], opts.order)
    Ds = richardson(nus, [imag_part(m) for m in Ms], opts.order)
    return BoundaryLimit(
        float(lam0), Ls[-1], opnorm(Ls[-1] - Ls[-2]), hermitian_part(Ds[-1]), opnorm(Ds[-1] - Ds[-2]),
        nus, Ms, opnorm(Ms[0]),
    )


# --------------------------------------------------------------------------
# Contour data
# --------------------------------------------------------------------------

def _contour(src: MSource, center: float, rho: float, Q: int, orders):
    theta = 2 * np.pi * (np.arange(Q) + 0.5) / Q
    vals = []
    for th in theta:
        v, ok = src.evaluate(center + rho * np.exp(1j * th))
        if not ok:
            raise NotConverged(f"M_+ not converged on the contour at theta={th:.4f}")
        vals.append(v)
    vals = np.array(vals)
    return {
        m: np.einsum("q,qij->ij", rho ** (-m) * np.exp(-1j * m * theta), vals) / Q
        for m in orders
    }


def laurent_coeffs(sys, alpha, lam_star: float, rho: float = 0.1, orders=(-1, 0, 1), Q: int = 64,
                   tol: float = 1e-6, opts: ClassifyOptions | None = None) -> dict:
    """Laurent coefficients ``K_m`` of ``M_+`` about ``lam_star`` by trapezoid quadrature.

    ``K_m = (1/Q) sum_j M_+(lam_j) rho^{-m} e^{-i m theta_j}`` with nodes
    ``lam_j = lam_star + rho e^{i theta_j}``, ``theta_j = 2 pi (j + 1/2) / Q``.

    Raises
    ------
    NotIsolated
        If ``K_{-1}`` is not Hermitian within ``tol * max(1, |K_{-1}|)``.
    """
    opts = opts or ClassifyOptions()
    src = _source(sys, alpha, opts)
    K = _contour(src, lam_star, rho, Q, tuple(orders))
    if -1 in K:
        k = K[-1]
        if opnorm(k - dagger(k)) > tol * max(1.0, opnorm(k)):
            raise NotIsolated(f"K_-1 not Hermitian at {lam_star!r}")
    return K


def recenter_pole(src: MSource, center: float, rho: float, Q: int = 64, iters: int = 3):
    """Move ``center`` onto a simple pole using ``K_{-2} / K_{-1}``; returns ``(pole, K)``."""
    K = None
    for _ in range(iters):
        K = _contour(src, center, rho, Q, (-2, -1, 0, 1))
        tr = np.trace(K[-1])
        if abs(tr) < 1e-300:
            break
        shift = (np.trace(K[-2]) / tr).real
        if abs(shift) > rho / 2:
            raise NotIsolated(f"pole estimate drifted by {shift:.3g} from {center!r}")
        center += shift
        if abs(shift) < 1e-14 * max(1.0, abs(center)):
            K = _contour(src, center, rho, Q, (-2, -1, 0, 1))
            break
    else:
        K = _contour(src, center, rho, Q, (-2, -1, 0, 1))
    return center, K


# --------------------------------------------------------------------------
# Spectral function increments
# --------------------------------------------------------------------------

def _arc_integral(src: MSource, l1: float, l2: float, nu: float, n: int, epsabs: float = 1e-11):
    """``int_{l1 + i nu}^{l2 + i nu} M dlam`` taken along the upper half circle."""
    c = 0.5 * (l1 + l2)
    r = 0.5 * (l2 - l1)

    def f(th):
        z = c + 1j * nu + r * np.exp(1j * th)
        v = src(z) * (-1j * r * np.exp(1j * th))
        return np.concatenate([v.real.ravel(), v.imag.ravel()])

    val, err = quad_vec(f, 0.0, np.pi, epsabs=epsabs, epsrel=1e-10, limit=400)
    if not np.all(np.isfinite(val)):
        raise NotConverged("arc quadrature failed")
    return (val[: n * n] + 1j * val[n * n :]).reshape(n, n)


def tau_increment(sys, alpha, l1: float, l2: float, nu: float | None = None, levels: int = 3,
                  opts: ClassifyOptions | None = None, epsabs: float = 1e-11) -> np.ndarray:
    """``tau(l2) - tau(l1)`` from ``(1/pi) int_{l1}^{l2} Im M_+(t + i nu) dt``.

    The integral is evaluated on an upper half circle with the same end
    points (Cauchy), at ``nu, nu/2, ...`` (``levels`` values), and
    extrapolated to ``nu = 0``.
    """
    if not l1 < l2:
        raise ValueError("need l1 < l2")
    opts = opts or ClassifyOptions()
    src = _source(sys, alpha, opts)
    nu = nu if nu is not None else 1e-3 * min(1.0, l2 - l1)
    nus = nu * 0.5 ** np.arange(levels)
    vals = [imag_part(_arc_integral(src, l1, l2, v, src.n, epsabs)) / np.pi for v in nus]
    return hermitian_part(_neville(nus, vals))


# --------------------------------------------------------------------------
# Point classification
# --------------------------------------------------------------------------

@dataclass
class ClassificationRecord:
    lambda0: float
    verdict: str
    L_hat: np.ndarray
    K_minus1: np.ndarray | None
    density_hat: np.ndarray | None
    divergent: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(x):
            if x is None:
                return None
            x = np.atleast_2d(np.asarray(x, dtype=complex))
            return [[[float(v.real), float(v.imag)] for v in row] for row in x]

        diag = {}
        for k, v in self.diagnostics.items():
            if isinstance(v, np.ndarray):
                diag[k] = enc(v) if np.iscomplexobj(v) or v.ndim == 2 else [float(t) for t in v]
            elif isinstance(v, (complex, np.complexfloating)):
                diag[k] = [float(v.real), float(v.imag)]
            elif isinstance(v, (np.floating, np.integer)):
                diag[k] = v.item()
            else:
                diag[k] = v
        return {
            "lambda0": float(self.lambda0),
            "verdict": self.verdict,
            "L_hat": enc(self.L_hat),
            "K_minus1": enc(self.K_minus1),
            "density_hat": enc(self.density_hat),
            "divergent": bool(self.divergent),
            "diagnostics": diag,
        }


def refine_pole(src: MSource, t0: float, half_width: float, levels: int = 3) -> float:
    """Locate the maximum of ``nu |Im M(t + i nu)|`` near ``t0`` at decreasing ``nu``."""
    t = float(t0)
    w = float(half_width)
    nu = w / 2
    for _ in range(levels):
        def neg(x, nu=nu):
            v, ok = src.evaluate(x + 1j * nu)
            return -nu * opnorm(imag_part(v)) if ok else 0.0

        res = minimize_scalar(neg, bounds=(t - w, t + w), method="bounded",
                              options={"maxiter": 40, "xatol": 1e-3 * nu})
        t = float(res.x)
        w = 5 * nu
        nu = nu / 10
    return t


def _flanks(src, lam_star, step, opts):
    d1, d2 = step, 10 * step
    nu = step / 50
    out = []
    for a, b in ((lam_star - d2, lam_star - d1), (lam_star + d1, lam_star + d2)):
        out.append(opnorm(tau_increment(src, None, a, b, nu=nu, opts=opts, epsabs=1e-3 * opts.eps_tau)))
    return out


def classify_point(sys, alpha, lam0: float, opts: ClassifyOptions | None = None, step: float | None = None,
                   known_poles=None) -> ClassificationRecord:
    """Classify the real point ``lam0``.

    ``known_poles`` maps previously refined pole locations to their records
    and short-circuits refinement for nearby grid points.
    """
    opts = opts or ClassifyOptions()
    step = step or opts.step
    src = _source(sys, alpha, opts)
    lam0 = float(lam0)
    try:
        bl = boundary_limit_L(src, None, lam0, opts=opts)
    except (NotConverged, WeylError) as exc:
        return ClassificationRecord(lam0, "Undetermined", np.full((src.n, src.n), np.nan), None, None,
                                    diagnostics={"reason": str(exc)})
    eps_L = opts.eps_L_rel * (1 + bl.M_ref)
    nL = opnorm(bl.L)
    diag = {"nus": bl.nus, "L_residual": bl.residual, "D_residual": bl.D_residual, "eps_L": eps_L}
    if nL > max(eps_L, 10 * bl.residual):
        return _pole_path(src, lam0, bl, opts, step, diag, known_poles)
    D = bl.D
    nD = opnorm(D)
    trend = bl.D_trend
    divergent = len(trend) >= 4 and np.all(np.diff(trend[-4:]) > 0) and trend[-1] > 1.2 * trend[-4] \
        and bl.D_residual > 0.1 * nD
    if divergent:
        return ClassificationRecord(lam0, "Continuous", bl.L, None, None, True, diag)
    if nD < opts.eps_im and bl.D_residual < opts.eps_im:
        return ClassificationRecord(lam0, "Resolvent", bl.L, None, D, False, diag)
    if nD >= opts.eps_im and bl.D_residual < 0.1 * nD:
        return ClassificationRecord(lam0, "Continuous", bl.L, None, D, False, diag)
    return ClassificationRecord(lam0, "Undetermined", bl.L, None, D, False, diag)


def _pole_path(src, lam0, bl, opts, step, diag, known_poles):
    n = src.n
    hit = None
    for p in known_poles or ():
        if abs(p.diagnostics.get("lambda_star", np.inf) - lam0) < 10 * step:
            hit = p
            break
    if hit is None:
        hit = classify_pole(src, lam0, opts, step)
    lam_star = hit.diagnostics.get("lambda_star", lam0)
    diag = {**diag, **{k: v for k, v in hit.diagnostics.items() if k not in diag}}
    tol = 1e-7 * max(1.0, abs(lam0))
    if hit.verdict == "DiscreteEigenvalue" and abs(lam_star - lam0) > tol:
        # isolated pole nearby and no other spectrum within the flanks
        if abs(lam_star - lam0) < 10 * step:
            return ClassificationRecord(lam0, "Resolvent", bl.L, None, None, False,
                                        {**diag, "note": "near an isolated eigenvalue"})
    if hit.verdict in ("DiscreteEigenvalue", "PointContinuous") and abs(lam_star - lam0) <= tol:
        return ClassificationRecord(lam0, hit.verdict, bl.L, hit.K_minus1, None, False, diag)
    if hit.verdict == "PointContinuous":
        return ClassificationRecord(lam0, "Continuous", bl.L, None, None, False,
                                    {**diag, "note": "near an embedded eigenvalue"})
    return ClassificationRecord(lam0, "Undetermined", bl.L, None, None, False, diag)


def classify_pole(sys, t0: float, opts: ClassifyOptions | None = None, step: float | None = None,
                  alpha=None, half_width: float | None = None) -> ClassificationRecord:
    """Refine a pole candidate near ``t0`` and decide isolated vs embedded."""
    opts = opts or ClassifyOptions()
    step = step or opts.step
    src = _source(sys, alpha, opts)
    n = src.n
    try:
        lam_star = refine_pole(src, t0, half_width or step)
        flanks = _flanks(src, lam_star, step, opts)
    except (NotConverged, WeylError) as exc:
        return ClassificationRecord(t0, "Undetermined", np.full((n, n), np.nan), None, None,
                                    diagnostics={"reason": str(exc)})
    diag = {"flank_increments": flanks}
    if max(flanks) < opts.eps_tau:
        rho = min(opts.rho, 5 * step)
        try:
            lam_star, K = recenter_pole(src, lam_star, rho, opts.Q)
        except (NotConverged, NotIsolated, WeylError) as exc:
            return ClassificationRecord(lam_star, "Undetermined", np.full((n, n), np.nan), None, None,
                                        diagnostics={**diag, "reason": str(exc)})
        Km1 = hermitian_part(K[-1])
        bl = boundary_limit_L(src, None, lam_star, opts=opts)
        diag.update(lambda_star=lam_star, K0=hermitian_part(K[0]), K1=hermitian_part(K[1]),
                    L_residual=bl.residual, residue_consistency=opnorm(Km1 - 1j * bl.L), rho=rho)
        ev = np.linalg.eigvalsh(Km1)
        if ev[-1] > 1e-8 * max(1.0, -ev[0]) or opnorm(Km1) == 0:
            return ClassificationRecord(lam_star, "Undetermined", bl.L, Km1, None, False,
                                        {**diag, "reason": "residue not negative semidefinite"})
        return ClassificationRecord(lam_star, "DiscreteEigenvalue", bl.L, Km1, None, False, diag)
    bl = boundary_limit_L(src, None, lam_star, opts=opts)
    diag.update(lambda_star=lam_star, L_residual=bl.residual)
    if max(flanks) >= 10 * opts.eps_tau:
        nL = opnorm(bl.L)
        if nL > max(opts.eps_L_rel * (1 + bl.M_ref), 10 * bl.residual):
            return ClassificationRecord(lam_star, "PointContinuous", bl.L, hermitian_part(1j * bl.L), None,
                                        False, diag)
        return ClassificationRecord(lam_star, "Continuous", bl.L, None, None, False, diag)
    return ClassificationRecord(lam_star, "Undetermined", bl.L, None, None, False, diag)


# --------------------------------------------------------------------------
# Eigenfunctions
# --------------------------------------------------------------------------

@dataclass
class EigenData:
    lam: float
    K_minus1: np.ndarray
    eigenfunction: np.ndarray
    gram: np.ndarray
    gram_residual: float
    boundary_residual: float
    fit_residual: float


def eigen_data(sys: SymplecticSystem, alpha, lam_star: float, K_minus1=None, tol: float = 1e-5,
               opts: ClassifyOptions | None = None) -> EigenData:
    """Eigenfunction columns ``Zt(lam*) K_{-1}`` and their Psi-Gram matrix.

    The columns are continued along the decaying solution subspace, which is
    stable for any window length.  ``Gram = -K_{-1}`` is asserted.

    Raises
    ------
    InconsistentResidue
        If ``|Gram + K_{-1}| > 100 tol max(1, |K_{-1}|)`` or the eigenfunction vanishes.
    """
    opts = opts or ClassifyOptions()
    alpha = as_boundary(alpha)
    n = sys.n
    if K_minus1 is None:
        src = _source(sys, alpha, opts)
        _, K = recenter_pole(src, lam_star, opts.rho, opts.Q, iters=1)
        K_minus1 = hermitian_part(K[-1])
    K = np.atleast_2d(np.asarray(K_minus1, dtype=complex))
    if opnorm(K) == 0:
        raise InconsistentResidue("K_-1 = 0 gives a zero eigenfunction")
    Y0 = -J(n) @ alpha.H @ K
    k_end = 64
    prev = None
    while True:
        basis = decaying_basis(sys, lam_star, k_end)
        Wv = basis.values(ref=0)
        C, *_ = np.linalg.lstsq(Wv[0], Y0, rcond=None)
        Y = Wv @ C
        P = sys.coefficients(0, k_end + 1)[1]
        G = hermitian_part(np.einsum("kia,kij,kjb->ab", np.conj(Y), P, Y))
        if prev is not None and opnorm(G - prev) <= 1e-14 * max(1.0, opnorm(G)):
            break
        if k_end >= 1 << 20:
            break
        prev = G
        k_end *= 2
    fit = opnorm(Wv[0] @ C - Y0) / max(opnorm(Y0), 1e-300)
    gres = opnorm(G + K)
    bres = opnorm(alpha.matrix @ Y0)
    if opnorm(G) == 0 or gres > 100 * tol * max(1.0, opnorm(K)):
        raise InconsistentResidue(f"Gram {np.round(G, 8).tolist()} vs -K_-1 {np.round(-K, 8).tolist()}")
    return EigenData(float(lam_star), K, Y, G, gres, bres, fit)


# --------------------------------------------------------------------------
# Boundary changes
# --------------------------------------------------------------------------

def transform_alpha(M_hat, alpha, alpha_hat, tol: float = 1e-12) -> np.ndarray:
    """``M(alpha) = [a J ah^* + a ah^* Mh] [a ah^* - a J ah^* Mh]^{-1}``.

    Raises
    ------
    PoleOfTransform
        When the right bracket is singular (smallest singular value below ``tol max(1, |Mh|)``).
    """
    a, ah = as_boundary(alpha), as_boundary(alpha_hat)
    Mh = np.atleast_2d(np.asarray(M_hat, dtype=complex))
    Jn = J(a.n)
    P = a.matrix @ ah.H
    Q = a.matrix @ Jn @ ah.H
    left = Q + P @ Mh
    right = P - Q @ Mh
    # a condition number alone misses scalar brackets, which always have cond 1
    scale = max(1.0, opnorm(Mh))
    if np.linalg.svd(right, compute_uv=False)[-1] <= tol * scale:
        raise PoleOfTransform("boundary change bracket is singular")
    return np.linalg.solve(right.T, left.T).T


# --------------------------------------------------------------------------
# Interval scans
# --------------------------------------------------------------------------

@dataclass
class SpectralMap:
    interval: tuple
    resolution: int
    grid: np.ndarray
    records: list
    eigenvalues: list
    embedded: list = field(default_factory=list)
    candidates: list = field(default_factory=list)

    @property
    def eigenvalue_positions(self) -> np.ndarray:
        return np.array([r.diagnostics["lambda_star"] for r in self.eigenvalues])

    @property
    def undetermined_fraction(self) -> float:
        return float(np.mean([r.verdict == "Undetermined" for r in self.records])) if self.records else 0.0

    def verdicts(self) -> list:
        return [r.verdict for r in self.records]


def detect_pole_candidates(src: MSource, a: float, b: float, nu: float) -> list:
    """Sharp local maxima of ``nu tr Im M(t + i nu)`` on a grid of spacing ``nu / 2``."""
    h = nu / 2
    pad = 4 * nu
    ts = np.arange(a - pad, b + pad + h / 2, h)
    f = np.full(ts.shape, np.nan)
    for i, t in enumerate(ts):
        v, ok = src.evaluate(t + 1j * nu)
        if ok:
            f[i] = nu * np.trace(imag_part(v)).real
    out = []
    w = 8
    for i in range(1, len(ts) - 1):
        if not np.isfinite(f[i]) or f[i] <= 0:
            continue
        if not (f[i] >= f[i - 1] and f[i] > f[i + 1]):
            continue
        lo, hi = max(0, i - w), min(len(ts) - 1, i + w)
        side = np.nanmax([f[lo], f[hi]])
        if np.isfinite(side) and f[i] > 1.5 * side and a - h <= ts[i] <= b + h:
            out.append(float(ts[i]))
    return out


def scan_spectrum(sys, alpha, interval, resolution: int, opts: ClassifyOptions | None = None) -> SpectralMap:
    """Classify a uniform grid on ``interval`` and locate the poles inside it."""
    a, b = map(float, interval)
    if not a < b or resolution < 2:
        raise ValueError("need a < b and resolution >= 2")
    opts = opts or ClassifyOptions()
    src = _source(sys, alpha, opts)
    grid = np.linspace(a, b, int(resolution))
    coarse = src if src.exact else MSource(src.system, src.alpha, 1e-8, opts.N_max, opts.seed)
    cands = detect_pole_candidates(coarse, a, b, opts.detect_nu)
    eig, emb = [], []
    for t in cands:
        rec = classify_pole(src, t, opts, half_width=opts.detect_nu)
        lam = rec.diagnostics.get("lambda_star")
        if lam is None or not (a <= lam <= b):
            continue
        if rec.verdict == "DiscreteEigenvalue":
            if all(abs(lam - e.diagnostics["lambda_star"]) > 1e-8 for e in eig):
                eig.append(rec)
        elif rec.verdict == "PointContinuous":
            emb.append(rec)
    eig.sort(key=lambda r: r.diagnostics["lambda_star"])
    records = [classify_point(src, None, t, opts, known_poles=eig + emb) for t in grid]
    return SpectralMap((a, b), int(resolution), grid, records, eig, emb, cands)


def interlace_check(sys, alpha, alpha_hat, interval, resolution: int = 11,
                    opts: ClassifyOptions | None = None, maps=None) -> dict:
    """Check the eigenvalue interlacing bounds between two boundary matrices.

    Returns a report with ``(i)`` the per-gap counts against
    ``m = rank(alpha J alpha_hat^*)``, ``(ii)`` the ``n + 1`` window test and
    ``(iii)`` strict alternation for ``n = 1`` when ``sin(a0 - ah0) != 0``.
    """
    a, ah = as_boundary(alpha), as_boundary(alpha_hat)
    if maps is None:
        maps = (scan_spectrum(sys, a, interval, resolution, opts), scan_spectrum(sys, ah, interval, resolution, opts))
    m1, m2 = maps
    lo, hi = map(float, interval)
    if any(r.verdict == "Undetermined" for r in m1.records + m2.records):
        return {"verdict": "Inconclusive", "reason": "undetermined points in window"}
    ev = np.sort(m1.eigenvalue_positions)
    eh = np.sort(m2.eigenvalue_positions)
    n = a.n
    cross = a.matrix @ J(n) @ ah.H
    m = int(np.linalg.matrix_rank(cross, tol=1e-10))
    gaps = []
    edges = np.concatenate([[lo], ev, [hi]]) if ev.size else np.array([lo, hi])
    for x, y in zip(edges[:-1], edges[1:]):
        gaps.append(int(np.sum((eh > x) & (eh < y))))
    ok_i = all(c <= m for c in gaps[1:-1]) and gaps[0] <= m
    ok_ii = all(np.any((eh >= ev[i]) & (eh <= ev[i + n])) for i in range(len(ev) - n)) if m > 0 else True
    ok_iii = None
    if n == 1 and m == 1:
        ok_iii = all(c == 1 for c in gaps[1:-1])
    verdict = "Pass" if ok_i and ok_ii and (ok_iii in (None, True)) else "Fail"
    return {
        "verdict": verdict,
        "m": m,
        "alpha_eigenvalues": ev.tolist(),
        "alpha_hat_eigenvalues": eh.tolist(),
        "gap_counts": gaps,
        "at_most_m": ok_i,
        "n_plus_one_window": ok_ii,
        "strict_alternation": ok_iii,
    }
