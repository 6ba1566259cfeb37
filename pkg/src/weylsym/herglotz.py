"""Exact Herglotz functions with a step spectral part.

These serve as synthetic M-functions with known spectral data, so the
classifier can be checked against planted jumps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PoleError


@dataclass(frozen=True)
class StepSpectralFunction:
    """Right-continuous nondecreasing Hermitian step function.

    Parameters
    ----------
    breakpoints : array_like, shape (K,)
        Jump locations, sorted increasingly.
    increments : array_like, shape (K, n, n) or (K,)
        Hermitian psd jump sizes.
    """

    breakpoints: np.ndarray
    increments: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        c = np.asarray(self.increments, dtype=complex)
        if c.ndim == 1:
            c = c[:, None, None]
        if c.shape[0] != t.shape[0]:
            raise ValueError("one increment per breakpoint is required")
        order = np.argsort(t, kind="stable")
        t, c = t[order], c[order]
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be distinct")
        for ck in c:
            if np.abs(ck - ck.conj().T).max() > 1e-12 or np.linalg.eigvalsh(ck)[0] < -1e-12:
                raise ValueError("increments must be Hermitian psd")
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "increments", c)

    @property
    def n(self) -> int:
        return self.increments.shape[-1]

    def __call__(self, t: float) -> np.ndarray:
        """Sum of the jumps at breakpoints ``<= t``."""
        idx = np.searchsorted(self.breakpoints, t, side="right")
        return self.increments[:idx].sum(axis=0) if idx else np.zeros((self.n, self.n), complex)

    def jump(self, t: float) -> np.ndarray:
        hit = np.nonzero(self.breakpoints == t)[0]
        return self.increments[hit[0]] if hit.size else np.zeros((self.n, self.n), complex)


def semicircle_m(lam: complex) -> complex:
    """Herglotz function of the semicircle density ``sqrt(4 - t^2) / (2 pi)`` on ``[-2, 2]``.

    Equals ``(sqrt(lam^2 - 4) - lam) / 2`` on the branch with ``Im m * Im lam > 0``;
    real arguments give the boundary value from above.
    """
    lam = complex(lam)
    if lam.imag < 0:
        return np.conj(semicircle_m(np.conj(lam)))
    if lam.imag == 0:
        x = lam.real
        if abs(x) >= 2:
            return complex((np.sign(x) * np.sqrt(x * x - 4) - x) / 2)
        return complex(-x / 2, np.sqrt(4 - x * x) / 2)
    s = np.sqrt(lam * lam - 4)
    m = (s - lam) / 2
    if m.imag < 0:
        m = (-s - lam) / 2
    return complex(m)


def herglotz_eval(tau: StepSpectralFunction, M0, M1, lam: complex) -> np.ndarray:
    """``M0 + lam M1 + sum_t c_t (1/(t - lam) - t/(1 + t^2))``.

    Raises
    ------
    PoleError
        If ``lam`` is real and coincides with a breakpoint.
    """
    lam = complex(lam)
    n = tau.n
    M0 = np.asarray(M0, dtype=complex).reshape(n, n)
    M1 = np.asarray(M1, dtype=complex).reshape(n, n)
    t = tau.breakpoints
    if lam.imag == 0 and np.any(t == lam.real):
        raise PoleError(f"lambda={lam.real!r} is a jump of tau")
    w = 1.0 / (t - lam) - t / (1.0 + t * t)
    return M0 + lam * M1 + np.einsum("k,kij->ij", w, tau.increments)


@dataclass(frozen=True)
class HerglotzModel:
    """Synthetic M-function: step part plus an optional absolutely continuous part.

    ``ac`` is a callable ``lam -> n x n`` Herglotz function (for example
    a multiple of :func:`semicircle_m`) added to the step model.
    """

    tau: StepSpectralFunction
    M0: np.ndarray = None
    M1: np.ndarray = None
    ac: Callable | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        n = self.tau.n
        z = np.zeros((n, n), complex)
        object.__setattr__(self, "M0", z if self.M0 is None else np.asarray(self.M0, complex).reshape(n, n))
        object.__setattr__(self, "M1", z if self.M1 is None else np.asarray(self.M1, complex).reshape(n, n))

    @property
    def n(self) -> int:
        return self.tau.n

    def __call__(self, lam: complex) -> np.ndarray:
        out = herglotz_eval(self.tau, self.M0, self.M1, lam)
        if self.ac is not None:
            out = out + np.asarray(self.ac(lam), dtype=complex).reshape(self.n, self.n)
        return out


def semicircle_part(weight: float = 1.0) -> Callable:
    """``lam -> weight * semicircle_m(lam)`` as a 1 x 1 matrix."""

    def ac(lam):
        return np.array([[weight * semicircle_m(lam)]])

    return ac
