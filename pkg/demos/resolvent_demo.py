"""Apply the resolvent of a random two-channel system to a compact forcing.

Checks the forced recursion, the boundary condition and the bound
|z| <= |f| / |Im lambda| in the Psi norm.
"""
import numpy as np

from weylsym import random_boundary, random_system, resolve
from weylsym.resolvent import defect, psi_norm


def main():
    rng = np.random.default_rng(0)
    sys_ = random_system(2, rng, length=512)
    alpha = random_boundary(2, rng)
    f = np.zeros((20, 4), complex)
    f[5:20] = rng.standard_normal((15, 4)) + 1j * rng.standard_normal((15, 4))
    for lam in (0.5 + 0.5j, -1.0 + 0.1j, 2.0 + 0.02j):
        z = resolve(sys_, alpha, lam, f, N_out=800)
        ratio = psi_norm(sys_, z) * abs(lam.imag) / psi_norm(sys_, f)
        bc = np.abs(alpha.matrix @ z.values[0, :, 0]).max()
        print(f"lambda={lam!s:12} defect={defect(sys_, lam, z, f).max():.1e} "
              f"alpha z_0={bc:.1e} |z||Im lambda|/|f|={ratio:.4f}")


if __name__ == "__main__":
    main()
