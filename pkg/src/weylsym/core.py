"""Systems, boundary matrices and structural validation.

A half-line system is stored through two coefficient providers, ``S`` and
``Psi``, each a pure function mapping an integer array ``k`` to a stack of
``2n x 2n`` complex matrices.  The derived coefficient ``V_k = -J Psi_k S_k``
turns the recursion into ``z_k = (S_k + lam V_k) z_{k+1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ProviderError, StructureError, WeylError

DEFAULT_TOL = 1e-10
_CACHE_BYTES = 48 << 20


@lru_cache(maxsize=None)
def _J(n: int) -> np.ndarray:
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = np.eye(n)
    out[n:, :n] = -np.eye(n)
    out.setflags(write=False)
    return out


def J(n: int) -> np.ndarray:
    """The canonical ``2n x 2n`` skew matrix ``[[0, I], [-I, 0]]`` (read-only)."""
    return _J(int(n))


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def imag_part(a: np.ndarray) -> np.ndarray:
    """Matrix imaginary part ``(A - A*) / 2i``; Hermitian for every ``A``."""
    return (a - dagger(a)) / 2j


def opnorm(a) -> float:
    """Spectral norm (largest absolute entry for vectors)."""
    a = np.asarray(a)
    if a.ndim < 2:
        return float(np.max(np.abs(a))) if a.size else 0.0
    if a.shape == (1, 1):
        return float(abs(a[0, 0]))
    return float(np.linalg.norm(a, 2))


# --------------------------------------------------------------------------
# Coefficient sequences
# --------------------------------------------------------------------------

class Const:
    """Constant sequence ``x_k = value`` (scalar or array valued)."""

    kind = "const"

    def __init__(self, value):
        self.value = np.asarray(value)

    def __call__(self, k):
        k = np.asarray(k)
        return np.broadcast_to(self.value, k.shape + self.value.shape).copy()

    def __repr__(self):
        return f"Const({self.value.tolist()!r})"


class Affine:
    """``x_k = offset + slope * k``."""

    kind = "affine"

    def __init__(self, offset, slope):
        self.offset = np.asarray(offset)
        self.slope = np.asarray(slope)

    def __call__(self, k):
        k = np.asarray(k)
        kk = k.reshape(k.shape + (1,) * self.slope.ndim)
        return self.offset + self.slope * kk

    def __repr__(self):
        return f"Affine({self.offset.tolist()!r}, {self.slope.tolist()!r})"


class Periodic:
    """``x_k = values[k mod p]``."""

    kind = "periodic"

    def __init__(self, values):
        self.values = np.asarray(values)
        if self.values.shape[0] == 0:
            raise ValueError("periodic sequence needs at least one value")

    def __call__(self, k):
        return self.values[np.asarray(k) % self.values.shape[0]]

    def __repr__(self):
        return f"Periodic(period={self.values.shape[0]})"


class Table:
    """Tabulated prefix with a tail rule: ``"repeat-last"`` or ``"error"``."""

    kind = "table"

    def __init__(self, values, tail="repeat-last"):
        if tail not in ("repeat-last", "error"):
            raise ValueError(f"unknown tail rule {tail!r}")
        self.values = np.asarray(values)
        self.tail = tail
        if self.values.shape[0] == 0:
            raise ValueError("table needs at least one value")

    def __call__(self, k):
        k = np.asarray(k)
        last = self.values.shape[0] - 1
        if self.tail == "error" and k.size and k.max() > last:
            raise ProviderError(int(k[k > last].min()), "table exhausted (tail rule 'error')")
        return self.values[np.minimum(k, last)]

    def __repr__(self):
        return f"Table(len={self.values.shape[0]}, tail={self.tail!r})"


# --------------------------------------------------------------------------
# Systems
# --------------------------------------------------------------------------

Provider = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SymplecticSystem:
    """Time-reversed discrete symplectic system ``z_k = (S_k + lam V_k) z_{k+1}``.

    Parameters
    ----------
    n : int
        Half dimension; coefficients are ``2n x 2n``.
    S, Psi : callable
        Pure providers ``k -> (len(k), 2n, 2n)`` arrays.
    label : str
        Free text used in reports.
    """

    n: int
    S: Provider
    Psi: Provider
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def coefficients(self, k0: int, k1: int):
        """Return ``(S, Psi, V)`` stacked over ``k0 <= k < k1``."""
        limit = _CACHE_BYTES // (192 * self.n * self.n)
        if k1 <= limit:
            have = self._cache.get("upto", 0)
            if k1 > have:
                size = min(max(256, 4 << int(np.ceil(np.log2(k1)))), limit)
                ext = self._build(have, size)
                if have:
                    ext = tuple(np.concatenate([o, e]) for o, e in zip(self._cache["data"], ext))
                    for x in ext:
                        x.setflags(write=False)
                self._cache["data"] = ext
                self._cache["upto"] = size
            S, P, V = self._cache["data"]
            return S[k0:k1], P[k0:k1], V[k0:k1]
        return self._build(k0, k1)

    def _build(self, k0, k1):
        k = np.arange(k0, k1)
        m = 2 * self.n
        try:
            S = np.asarray(self.S(k), dtype=complex)
            P = np.asarray(self.Psi(k), dtype=complex)
        except WeylError:
            raise
        except Exception as exc:  # provider bug surfaces with its index range
            raise ProviderError(k0, f"provider failed on [{k0}, {k1}): {exc}") from exc
        if S.shape != (k1 - k0, m, m) or P.shape != (k1 - k0, m, m):
            raise ProviderError(k0, f"provider returned shapes {S.shape}, {P.shape}")
        V = -(J(self.n) @ P) @ S
        for a in (S, P, V):
            a.setflags(write=False)
        return S, P, V

    def at(self, k: int):
        """Single-index access ``(S_k, Psi_k, V_k)``."""
        S, P, V = self.coefficients(k, k + 1)
        return S[0], P[0], V[0]


# --------------------------------------------------------------------------
# Boundary matrices
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryMatrix:
    """An element of ``Gamma``: ``n x 2n`` with ``a a* = I`` and ``a J a* = 0``."""

    matrix: np.ndarray
    angle: float | None = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        n = a.shape[0]
        if a.shape != (n, 2 * n):
            raise StructureError(f"alpha: shape {a.shape} is not n x 2n")
        r1 = opnorm(a @ dagger(a) - np.eye(n))
        r2 = opnorm(a @ J(n) @ dagger(a))
        if max(r1, r2) > 1e-10:
            raise StructureError(f"alpha: not in Gamma (residuals {r1:.2e}, {r2:.2e})")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @classmethod
    def from_angle(cls, angle: float) -> "BoundaryMatrix":
        """Scalar case ``alpha = (sin a0, cos a0)``."""
        return cls(np.array([[np.sin(angle), np.cos(angle)]]), angle=float(angle))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def H(self) -> np.ndarray:
        return dagger(self.matrix)

    def __repr__(self):
        if self.angle is not None:
            return f"BoundaryMatrix.from_angle({self.angle!r})"
        return f"BoundaryMatrix({self.matrix.tolist()!r})"


def as_boundary(alpha) -> BoundaryMatrix:
    if isinstance(alpha, BoundaryMatrix):
        return alpha
    return BoundaryMatrix(alpha)


def random_boundary(n: int, rng: np.random.Generator) -> BoundaryMatrix:
    """Pseudorandom element of Gamma.

    Rows of ``(I, H)`` with ``H`` Hermitian span a Lagrangian subspace; they
    are orthonormalised and mixed by a random unitary.
    """
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(g)
    h = hermitian_part(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    base = np.hstack([np.eye(n), h])
    rows = np.linalg.solve(np.linalg.cholesky(base @ dagger(base)), base)
    return BoundaryMatrix(q @ rows)


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

@dataclass
class Check:
    residual: float
    tolerance: float
    first_index: int | None

    @property
    def passed(self) -> bool:
        return self.first_index is None


@dataclass
class ValidationReport:
    k_max: int
    checks: dict[str, Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            "k_max": self.k_max,
            "passed": self.passed,
            "checks": {
                name: {
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                    "first_index": c.first_index,
                }
                for name, c in self.checks.items()
            },
        }


def _scale(a):
    return np.maximum(1.0, np.linalg.norm(a, ord=2, axis=(-2, -1)))


def validate_system(sys: SymplecticSystem, k_max: int, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the structural identities of the coefficients on ``0 <= k <= k_max``.

    Tolerances are scale aware: each residual is compared with
    ``tol * max(1, |coefficient|)`` raised to the degree of the identity.
    """
    if k_max < 1 or tol <= 0:
        raise ValueError("need k_max >= 1 and tol > 0")
    S, P, V = sys.coefficients(0, k_max + 1)
    Jn = J(sys.n)
    sS, sP = _scale(S), _scale(P)

    def norms(x):
        return np.linalg.norm(x, ord=2, axis=(-2, -1))

    res = {
        "symplectic": (norms(dagger(S) @ Jn @ S - Jn), tol * sS**2),
        "psi_hermitian": (norms(P - dagger(P)), tol * sP),
        "psi_isotropic": (norms(P @ Jn @ P), tol * sP**2),
        "psi_psd": (
            np.maximum(0.0, -np.linalg.eigvalsh(hermitian_part(P))[:, 0]),
            tol * sP,
        ),
        "psi_v_roundtrip": (norms(P - Jn @ S @ Jn @ dagger(V) @ Jn), tol * sS**2 * sP),
    }
    checks = {}
    for name, (r, t) in res.items():
        bad = np.nonzero(r > t)[0]
        checks[name] = Check(
            residual=float(r.max()),
            tolerance=float(t.max()),
            first_index=int(bad[0]) if bad.size else None,
        )
    return ValidationReport(k_max=k_max, checks=checks)


def check_atkinson(sys: SymplecticSystem, N0: int, tol: float = DEFAULT_TOL, lam: complex = 0.0):
    """Strong Atkinson test on the window ``[0, N0]`` at the probe ``lam``.

    Every nontrivial solution has positive Psi-seminorm on the window iff the
    Gram matrix ``sum_k Phi_k*(conj lam) Psi_k Phi_k(lam)`` of the fundamental
    matrix (``Phi_0 = I``) is positive definite.  ``lam`` should be real so
    that the Gram matrix is Hermitian.

    Returns
    -------
    (bool, ndarray)
        Verdict and the ``2n x 2n`` Gram matrix.
    """
    from .propagate import propagate_forward

    m = 2 * sys.n
    Phi = propagate_forward(sys, lam, np.eye(m, dtype=complex), N0)
    _, P, _ = sys.coefficients(0, N0 + 1)
    Phic = Phi if np.isreal(lam) else propagate_forward(sys, np.conj(lam), np.eye(m, dtype=complex), N0)
    G = np.einsum("kji,kjl,klm->im", np.conj(Phic), P, Phi)
    G = hermitian_part(G)
    return bool(np.linalg.eigvalsh(G)[0] > tol), G


def psi_v_convert(S_k, X, direction: str, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Convert between the weight ``Psi_k`` and the coefficient ``V_k``.

    ``direction="psi->v"`` returns ``V = -J Psi S``; ``"v->psi"`` returns
    ``Psi = J S J V* J``.
    """
    S_k = np.asarray(S_k, dtype=complex)
    X = np.asarray(X, dtype=complex)
    n = S_k.shape[-1] // 2
    Jn = J(n)
    if opnorm(dagger(S_k) @ Jn @ S_k - Jn) > tol * max(1.0, opnorm(S_k)) ** 2:
        raise StructureError("S_k is not symplectic")
    if direction == "psi->v":
        return -Jn @ X @ S_k
    if direction == "v->psi":
        return Jn @ S_k @ Jn @ dagger(X) @ Jn
    raise ValueError(f"unknown direction {direction!r}")
