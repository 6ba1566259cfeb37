"""Eigenvalues of the discrete oscillator b_k = k from the Weyl function.

Poles of M_+ are located and their residues compared with a large
finite-section eigensolve, whose first eigenvector components give the
jumps of the spectral function.
"""
import numpy as np
from scipy.linalg import eigh_tridiagonal

from weylsym import BoundaryMatrix, oscillator, scan_spectrum


def main():
    alpha = BoundaryMatrix.from_angle(np.pi / 2)
    sm = scan_spectrum(oscillator(1.0), alpha, (-1, 5.5), 27)
    size = 2000
    t, v = eigh_tridiagonal(np.arange(1, size + 1, dtype=float), np.ones(size - 1), select="v", select_range=(-1, 5.5))
    print(" pole of M_+       truncation         -K_-1          v_1^2")
    for rec, tj, vj in zip(sm.eigenvalues, t, v[0]):
        lam = rec.diagnostics["lambda_star"]
        print(f"{lam:14.10f}  {tj:14.10f}  {-rec.K_minus1[0, 0].real:12.3e}  {vj * vj:12.3e}")
    print("\nverdicts on the grid:", "".join(x[0] for x in sm.verdicts()))


if __name__ == "__main__":
    main()
