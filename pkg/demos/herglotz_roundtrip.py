"""Recover planted spectral jumps from an exact Herglotz function.

Three jumps give isolated eigenvalues.  Adding a semicircle density turns the
jumps inside (-2, 2) into embedded eigenvalues (PointContinuous).
"""
import numpy as np

from weylsym import HerglotzModel, StepSpectralFunction, classify_point, scan_spectrum
from weylsym.herglotz import semicircle_part


def main():
    tau = StepSpectralFunction([-1.0, 0.0, 2.0], [0.5, 1.0, 0.25])
    sm = scan_spectrum(HerglotzModel(tau), None, (-2, 3), 26)
    print("recovered jumps:")
    for r in sm.eigenvalues:
        print(f"  t = {r.diagnostics['lambda_star']: .8f}   size = {-r.K_minus1[0, 0].real:.8f}")
    mixed = HerglotzModel(tau, ac=semicircle_part(1.0))
    print("\nwith a semicircle density:")
    for x in (-1.0, -0.5, 0.0, 2.0, 2.5):
        print(f"  {x:5.2f}  {classify_point(mixed, None, x).verdict}")


if __name__ == "__main__":
    main()
