"""Brute-force finite-section eigenvalues.

Two independent routes: a symmetric tridiagonal eigensolve of the truncated
Jacobi operator, and a real root scan of ``lam -> det(beta Zt_{N+1}(lam))``
for a general system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _kernels
from .core import J, SymplecticSystem, as_boundary
from .errors import BadInput
from .models import JacobiModel
from .propagate import chunks, initial_pair

MAX_SIZE = 1 << 22


def jacobi_truncation_eigs(m: JacobiModel, size: int, left_angle: float = np.pi / 2) -> np.ndarray:
    """Eigenvalues of ``T y = lam W y`` on indices ``1..size``.

    The left end couples ``y_0`` through ``sin(a0) y_0 = cos(a0) a_0 y_1``
    and the right end is ``y_{size+1} = 0``.  When ``sin(a0) = 0`` the
    relation forces ``y_1 = 0`` and index 1 drops out.

    Raises
    ------
    BadInput
        If ``size < 1`` or ``size`` exceeds :data:`MAX_SIZE`.
    """
    size = int(size)
    if size < 1 or size > MAX_SIZE:
        raise BadInput(f"size must be in [1, {MAX_SIZE}], got {size}")
    k = np.arange(0, size + 1)
    a = np.asarray(m.a(k), dtype=float)
    b = np.asarray(m.b(k), dtype=float)[1:].copy()
    w = np.asarray(m.w(k), dtype=float)[1:]
    off = a[1:size]
    s, c = np.sin(left_angle), np.cos(left_angle)
    if abs(s) < 1e-14:
        b, w, off = b[1:], w[1:], off[1:]
        if b.size == 0:
            return np.empty(0)
    else:
        b[0] += a[0] ** 2 * c / s
    r = 1.0 / np.sqrt(w)
    return eigh_tridiagonal(b * r * r, off * r[:-1] * r[1:], eigvals_only=True)


# --------------------------------------------------------------------------
# Determinant scan
# --------------------------------------------------------------------------

@dataclass
class RootScan:
    """Refined roots plus grid minima of ``|g|`` without a sign change."""

    roots: np.ndarray
    suspect: list = field(default_factory=list)
    evaluations: int = 0


class _Frame:
    """``g(lam) = det(P) / sqrt(det(P - iQ) det(P + iQ))`` with ``P = beta Zt``, ``Q = beta J Zt``.

    For real ``lam`` the frame ``Zt`` is Lagrangian, ``U = (P + iQ)(P - iQ)^{-1}``
    is unitary and ``g = prod cos(theta_j / 2)`` over its eigenphases, so
    ``g`` is real, invariant under positive rescaling of ``Zt``, and changes
    sign exactly where ``det(beta Zt) = 0``.

    For real scalar systems with ``beta z = 0`` meaning ``x = 0``, the number
    of generalized zeros of ``Zt`` on ``(0, N+1]`` changes by one at every
    root (discrete Sturm oscillation).  That count keeps the scan reliable
    when roots come in pairs closer than the grid.
    """

    def __init__(self, sys, alpha, beta, N):
        self.sys, self.N = sys, N
        self.beta = as_boundary(beta).matrix
        self.betaJ = self.beta @ J(sys.n)
        self.Z0 = np.ascontiguousarray(initial_pair(alpha)[1])
        self.calls = 0
        self.counting = sys.n == 1 and abs(self.beta[0, 1]) < 1e-14 and self._real()

    def _real(self):
        S, _, V = self.sys.coefficients(0, self.N + 1)
        arrays = (S, V, self.beta, self.Z0)
        return all(np.abs(np.imag(x)).max() == 0 for x in arrays)

    def state(self, lam):
        Z = self.Z0.copy()
        logs = np.zeros(1)
        count = np.zeros(1, np.int64)
        for a, b in chunks(0, self.N + 1):
            S, _, V = self.sys.coefficients(a, b)
            if self.counting:
                _kernels.forward_focal(S, V, complex(lam), Z, logs, count)
            else:
                _kernels.forward_scaled(S, V, complex(lam), Z, logs)
        self.calls += 1
        P = self.beta @ Z
        Q = self.betaJ @ Z
        num = np.linalg.det(P)
        root = np.sqrt(np.linalg.det(P - 1j * Q) * np.linalg.det(P + 1j * Q))
        phase = np.linalg.det(P + 1j * Q) / np.linalg.det(P - 1j * Q)
        return num, root, phase, int(count[0])

    @staticmethod
    def value(num, root, ref_root):
        # branch of the square root continued from ref_root
        if ref_root is not None and abs(root + ref_root) < abs(root - ref_root):
            root = -root
        return (num / root).real, root


def det_root_scan(sys: SymplecticSystem, alpha, beta, N: int, interval, resolution: int | None = None,
                  tol: float = 1e-10, suspect_tol: float = 1e-8, max_depth: int = 60) -> RootScan:
    """Real roots of ``det(beta Zt_{N+1}(lam))`` in ``[a, b]``.

    The base grid has ``resolution`` points (default ``8 (b - a)``, at least 16).
    Cells are split while they may hold more than one root: for real scalar
    systems with a Dirichlet-type ``beta`` by the oscillation count, otherwise while the phase of
    ``det U`` moves by more than ``pi/4`` or against its overall direction.
    Sign changes of ``g`` are then bisected to ``tol``.  Interior minima of
    ``|g|`` below ``suspect_tol`` without a sign change are reported as
    suspect (possible even multiplicity).
    """
    a, b = map(float, interval)
    if not b > a:
        return RootScan(np.empty(0))
    if resolution is None:
        resolution = int(max(8 * (b - a), 16))
    fr = _Frame(sys, alpha, beta, N)
    xs = np.linspace(a, b, max(int(resolution), 2))
    data = [fr.state(x) for x in xs]
    steps = [np.angle(data[i + 1][2] / data[i][2]) for i in range(len(xs) - 1)]
    direction = np.sign(np.sum(steps)) or 1.0

    pts = []

    def split(d0, d1):
        if fr.counting:
            return abs(d1[3] - d0[3]) > 1
        step = np.angle(d1[2] / d0[2])
        return abs(step) > np.pi / 4 or step * direction < -1e-12

    def refine(x0, d0, x1, d1, depth):
        if depth < max_depth and x1 - x0 > tol and split(d0, d1):
            xm = 0.5 * (x0 + x1)
            dm = fr.state(xm)
            refine(x0, d0, xm, dm, depth + 1)
            refine(xm, dm, x1, d1, depth + 1)
        else:
            pts.append((x1, d1))

    pts.append((xs[0], data[0]))
    for i in range(len(xs) - 1):
        refine(xs[i], data[i], xs[i + 1], data[i + 1], 0)

    vals, ref = [], None
    for x, d in pts:
        g, ref = fr.value(d[0], d[1], ref)
        vals.append(g)
    lam = np.array([p[0] for p in pts])
    g = np.array(vals)
    roots, suspect = [], []
    for i in range(len(lam) - 1):
        if g[i] == 0:
            roots.append(lam[i])
        elif g[i] * g[i + 1] < 0:
            roots.append(_bisect(fr, lam[i], lam[i + 1], g[i], pts[i][1][1], tol))
        elif fr.counting and pts[i + 1][1][3] != pts[i][1][3]:
            suspect.append(float(lam[i]))
        elif 0 < i and abs(g[i]) < suspect_tol and abs(g[i]) <= abs(g[i - 1]) and abs(g[i]) <= abs(g[i + 1]):
            suspect.append(float(lam[i]))
    if g[-1] == 0:
        roots.append(lam[-1])
    return RootScan(np.array(roots, dtype=float), suspect, fr.calls)


def _bisect(fr: _Frame, lo, hi, g_lo, root_lo, tol):
    s_lo = np.sign(g_lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        num, root, _, _ = fr.state(mid)
        g, root = fr.value(num, root, root_lo)
        if g == 0:
            return mid
        if np.sign(g) == s_lo:
            lo, root_lo = mid, root
        else:
            hi = mid
    return 0.5 * (lo + hi)
