"""Weyl function and spectral map of the free Jacobi operator.

Prints M_+ at a few points next to the closed form, then classifies a grid
on [-3, 3]: continuous spectrum inside [-2, 2], resolvent set outside.
"""
import numpy as np

from weylsym import BoundaryMatrix, WeylFunction, free_jacobi, scan_spectrum


def closed_form(lam: complex) -> complex:
    s = np.sqrt(lam * lam - 4 + 0j)
    m = (s - lam) / 2
    return m if m.imag * np.sign(lam.imag or 1) >= 0 and abs(m) <= 1 else (-s - lam) / 2


def main():
    sys_ = free_jacobi()
    alpha = BoundaryMatrix.from_angle(np.pi / 2)
    wf = WeylFunction(sys_, alpha)
    print("lambda        M_+(lambda)                 closed form")
    for lam in (1j, 2j, 0.5 + 0.1j, 3.0 + 0j):
        print(f"{lam!s:12}  {wf(lam)[0, 0]:.10f}  {closed_form(lam):.10f}")
    sm = scan_spectrum(sys_, alpha, (-3, 3), 25)
    print("\nlambda0  verdict      Im M_+(lambda0 + i0)   sqrt(4 - x^2)/2")
    for r in sm.records:
        x = r.lambda0
        d = "" if r.density_hat is None else f"{r.density_hat[0, 0].real:.6f}"
        ref = f"{np.sqrt(4 - x * x) / 2:.6f}" if abs(x) < 2 else ""
        print(f"{x:7.3f}  {r.verdict:11}  {d:>20}   {ref:>14}")


if __name__ == "__main__":
    main()
