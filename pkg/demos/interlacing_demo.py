"""Eigenvalues of the oscillator for two boundary conditions interlace."""
import numpy as np

from weylsym import BoundaryMatrix, interlace_check, oscillator


def main():
    rep = interlace_check(oscillator(1.0), BoundaryMatrix.from_angle(np.pi / 2), BoundaryMatrix.from_angle(0.0),
                          (0, 6), 11)
    print("alpha     eigenvalues:", np.round(rep["alpha_eigenvalues"], 8))
    print("alpha_hat eigenvalues:", np.round(rep["alpha_hat_eigenvalues"], 8))
    print("counts per gap:", rep["gap_counts"], "verdict:", rep["verdict"])


if __name__ == "__main__":
    main()
