"""Acceptance suite: eleven end-to-end criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line.  Run under pytest (the lines are
repeated in the terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

from weylsym.classify import classify_point, eigen_data, interlace_check, scan_spectrum, tau_increment, transform_alpha
from weylsym.core import BoundaryMatrix, J, Table, dagger, imag_part, random_boundary, validate_system
from weylsym.herglotz import HerglotzModel, StepSpectralFunction, semicircle_part
from weylsym.models import JacobiModel, free_jacobi, jacobi_to_symplectic, oscillator, random_system
from weylsym.oracle import det_root_scan, jacobi_truncation_eigs
from weylsym.propagate import lagrange_defect, propagate_inhomogeneous, wronskian_residual
from weylsym.resolvent import GreenKernel, defect, psi_norm, resolve
from weylsym.weyl import WeylFunction, default_probes, limit_m, regular_m

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run from another directory
    ACCEPTANCE_LINES = []

DIRICHLET = BoundaryMatrix.from_angle(np.pi / 2)


def _report(num: int, title: str, ok: bool, detail: str, t0: float) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {num:2d} {title}: {detail} ({time.perf_counter() - t0:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


def cf_free_jacobi(lam: complex, iters: int = 20000) -> complex:
    """Attracting fixed point of ``m = -1/(lam + m)``."""
    m = 0j
    for _ in range(iters):
        m = -1.0 / (lam + m)
    return m


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------

def criterion_01():
    """Wronskian and Lagrange identities on random systems."""
    rng = np.random.default_rng(7)
    K = 1000
    k = np.arange(1, K + 1)
    w_worst = l_worst = 0.0
    valid = True
    for s in range(20):
        n = 1 + s % 2
        sys_ = random_system(n, rng, length=K + 1)
        valid &= validate_system(sys_, K).passed
        alpha = random_boundary(n, rng)
        for i in range(10):
            lam = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
            # residual in units of |Phi(conj lam)| |Phi(lam)|, the roundoff scale of the product
            r = wronskian_residual(sys_, alpha, lam, K)
            w_worst = max(w_worst, float((r[1:] / np.sqrt(k)).max()))
            if i < 2:
                nu = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
                f = rng.standard_normal((K, 2 * n)) + 1j * rng.standard_normal((K, 2 * n))
                g = rng.standard_normal((K, 2 * n)) + 0j
                z = propagate_inhomogeneous(sys_, lam, rng.standard_normal(2 * n) + 0j, f, K)
                u = propagate_inhomogeneous(sys_, nu, rng.standard_normal(2 * n) + 0j, g, K)
                d = lagrange_defect(sys_, lam, nu, z, u, f, g, (0, K - 1))
                P = sys_.coefficients(0, K)[1]
                scale = np.abs(z).max() * np.abs(u).max() * max(1.0, np.abs(P).max()) * (2 + abs(lam) + abs(nu))
                l_worst = max(l_worst, float(np.abs(d).max() / scale))
    ok = valid and w_worst < 1e-10 and l_worst < 1e-10
    return ok, f"max wronskian/sqrt(k) {w_worst:.1e}, lagrange {l_worst:.1e}, all validated {valid}"


def criterion_02():
    """Weyl circle residual and nested probe spread, free Jacobi at i."""
    fj = free_jacobi()
    probes = default_probes(DIRICHLET)
    spreads, circle = [], 0.0
    for N in range(1, 61):
        vals = []
        for b in probes:
            M, res = regular_m(fj, DIRICHLET, b, 1j, N, full=True)
            vals.append(M)
            if N == 60:
                circle = max(circle, res)
        spreads.append(max(np.abs(a - c).max() for a in vals for c in vals))
    mono = all(b <= a + 1e-12 for a, b in zip(spreads, spreads[1:]))
    ok = circle < 1e-9 and mono and spreads[-1] < 1e-6
    return ok, f"circle residual {circle:.1e}, spread nonincreasing {mono}, final spread {spreads[-1]:.1e}"


def criterion_03():
    """Closed-form M_+ of the free Jacobi operator."""
    fj = free_jacobi()
    errs = []
    for lam, closed, tol in ((1j, 1j * (np.sqrt(5) - 1) / 2, 1e-6), (2j, 1j * (np.sqrt(2) - 1), 1e-6),
                             (3.0, (np.sqrt(5) - 3) / 2, 1e-5)):
        ev = limit_m(fj, DIRICHLET, lam)
        oracle = cf_free_jacobi(lam)
        e = abs(ev.value[0, 0] - oracle)
        errs.append((e, tol, ev.converged and abs(oracle - closed) < 1e-12))
    ok = all(e < t and c for e, t, c in errs)
    return ok, "errors vs continued fraction " + ", ".join(f"{e:.1e}" for e, _, _ in errs)


def criterion_04():
    """Nevanlinna property and conjugate symmetry on a 10 x 10 grid."""
    rng = np.random.default_rng(3)
    cases = [("free", free_jacobi(), DIRICHLET), ("oscillator", oscillator(1.0), DIRICHLET),
             ("random n=2", random_system(2, rng), random_boundary(2, rng))]
    mins, syms, conv = [], [], True
    for _, sys_, alpha in cases:
        wf = WeylFunction(sys_, alpha)
        mn, cs = np.inf, 0.0
        for x in np.linspace(-3, 3, 10):
            for y in np.geomspace(1e-2, 1, 10):
                a, b = wf.evaluate(complex(x, y)), wf.evaluate(complex(x, -y))
                conv &= a.converged and b.converged
                mn = min(mn, np.linalg.eigvalsh(imag_part(a.value))[0])
                cs = max(cs, np.abs(b.value - dagger(a.value)).max())
        mins.append(mn)
        syms.append(cs)
    ok = conv and min(mins) >= -1e-8 and max(syms) < 1e-10
    detail = "; ".join(f"{c[0]}: min eig {m:.1e}, sym {s:.1e}" for c, m, s in zip(cases, mins, syms))
    return ok, detail


def criterion_05():
    """Green kernel identities, forced-system defect and the resolvent bound."""
    rng = np.random.default_rng(5)
    sym = 0.0
    systems = [(free_jacobi(), DIRICHLET), (oscillator(1.0), DIRICHLET)]
    r2 = random_system(2, rng, length=512)
    systems.append((r2, random_boundary(2, rng)))
    for sys_, alpha in systems:
        lam = 0.4 + 0.3j
        G, Gc = GreenKernel(sys_, alpha, lam, 64), GreenKernel(sys_, alpha, np.conj(lam), 64)
        Jn = J(sys_.n)
        for k in range(40):
            for j in range(40):
                if j != k:
                    sym = max(sym, np.abs(Gc(k, j) - dagger(G(j, k))).max())
            sym = max(sym, np.abs(Gc(k, k) - (dagger(G(k, k)) - Jn)).max())
    worst_defect = worst_ratio = 0.0
    lams = [0.5 + 0.3j, -1.2 + 0.05j, 2.5 + 1.0j, 0.1 + 0.02j, -0.3 - 0.4j]
    kernels = {}
    for i in range(50):
        sys_, alpha = systems[i % 3]
        lam = lams[i % len(lams)]
        key = (i % 3, lam)
        if key not in kernels:
            kernels[key] = GreenKernel(sys_, alpha, lam, 600)
        n = sys_.n
        start, length = int(rng.integers(0, 30)), int(rng.integers(1, 20))
        F = np.zeros((start + length, 2 * n), complex)
        F[start:] = rng.standard_normal((length, 2 * n)) + 1j * rng.standard_normal((length, 2 * n))
        z = resolve(sys_, alpha, lam, F, N_out=500, kernel=kernels[key])
        worst_defect = max(worst_defect, float(defect(sys_, lam, z, F).max()))
        nf = psi_norm(sys_, F)
        if nf > 0:
            worst_ratio = max(worst_ratio, psi_norm(sys_, z) * abs(lam.imag) / nf)
    ok = sym < 1e-9 and worst_defect < 1e-9 and worst_ratio <= 1 + 1e-6
    return ok, f"symmetry {sym:.1e}, defect {worst_defect:.1e}, max |z||Im lam|/|f| {worst_ratio:.4f}"


def criterion_06():
    """Free Jacobi continuous spectrum and resolvent set."""
    fj = free_jacobi()
    bad = []
    worst = 0.0
    for x in (0.0, 1.0, -1.0, 1.5, -1.5):
        r = classify_point(fj, DIRICHLET, x)
        dens = np.nan if r.density_hat is None else r.density_hat[0, 0].real
        err = abs(dens - np.sqrt(4 - x * x) / 2)
        worst = max(worst, err) if np.isfinite(err) else np.inf
        if r.verdict != "Continuous" or not err < 1e-3:
            bad.append((x, r.verdict))
    for x in (2.5, -2.5, 3.0, -3.0):
        r = classify_point(fj, DIRICHLET, x)
        if r.verdict != "Resolvent":
            bad.append((x, r.verdict))
    return not bad, f"density error {worst:.1e}, mismatches {bad}"


def criterion_07():
    """Oscillator eigenvalues, residues and spectral jumps against the truncation."""
    osc = oscillator(1.0)
    size = 2000
    t, v = eigh_tridiagonal(np.arange(1, size + 1, dtype=float), np.ones(size - 1), select="i", select_range=(0, 5))
    c = v[0] ** 2  # 1 / |Zt(t_j)|^2 for the unit eigenvector
    gap = np.diff(t).min()
    pos = law = jump = gram = 0.0
    verdicts = True
    for j in range(5):
        r = classify_point(osc, DIRICHLET, t[j])
        verdicts &= r.verdict == "DiscreteEigenvalue" and r.K_minus1 is not None
        if r.K_minus1 is None:
            pos = law = jump = np.inf
            continue
        lam = r.diagnostics["lambda_star"]
        K = r.K_minus1[0, 0].real
        verdicts &= K < 0
        pos = max(pos, abs(lam - t[j]))
        law = max(law, abs(K / c[j] + 1))
        ed = eigen_data(osc, DIRICHLET, lam, r.K_minus1)
        gram = max(gram, abs(ed.gram[0, 0].real / K + 1))
        d = tau_increment(osc, DIRICHLET, lam - 0.3 * gap, lam + 0.3 * gap)[0, 0].real
        jump = max(jump, abs(d + K))
    ok = verdicts and pos < 1e-6 and law < 1e-3 and gram < 1e-3 and jump < 1e-3
    return ok, (f"position {pos:.1e}, K|Zt|^2+1 oracle {law:.1e}, own eigenfunction {gram:.1e}, "
                f"jump+K {jump:.1e}, verdicts {verdicts}")


def criterion_08():
    """Planted jumps of an exact Herglotz function."""
    pts, sizes = np.array([-1.0, 0.0, 2.0]), np.array([0.5, 1.0, 0.25])
    model = HerglotzModel(StepSpectralFunction(pts, sizes))
    sm = scan_spectrum(model, None, (-2, 3), 26)
    found = sm.eigenvalue_positions
    K = np.array([-e.K_minus1[0, 0].real for e in sm.eigenvalues])
    ok_count = len(found) == 3
    perr = np.abs(found - pts).max() if ok_count else np.inf
    serr = np.abs(K - sizes).max() if ok_count else np.inf
    embedded = HerglotzModel(StepSpectralFunction(pts, sizes), ac=semicircle_part(1.0))
    pc = [classify_point(embedded, None, x).verdict for x in (-1.0, 0.0)]
    cont = classify_point(embedded, None, 1.0).verdict
    ok = ok_count and perr < 1e-4 and serr < 1e-4 and pc == ["PointContinuous"] * 2 and cont == "Continuous"
    return ok, f"positions {perr:.1e}, sizes {serr:.1e}, on semicircle {pc}, off the jumps {cont}"


def criterion_09():
    """Boundary changes: M transform, continuous set invariance, interlacing."""
    rng = np.random.default_rng(9)
    sys_ = random_system(2, rng)
    a, ah = random_boundary(2, rng), random_boundary(2, rng)
    wa, wh = WeylFunction(sys_, a), WeylFunction(sys_, ah)
    terr = 0.0
    for _ in range(10):
        lam = complex(rng.uniform(-2, 2), rng.uniform(0.05, 1.0))
        terr = max(terr, np.abs(transform_alpha(wh(lam), a, ah) - wa(lam)).max())
    fj = free_jacobi()
    grid = np.linspace(-2, 2, 21)[1:-1]
    sets = []
    for ang in (0.0, np.pi / 4, np.pi / 2):
        al = BoundaryMatrix.from_angle(ang)
        sets.append(tuple(float(x) for x in grid if classify_point(fj, al, x).verdict == "Continuous"))
    same = all(s == sets[0] for s in sets) and len(sets[0]) == len(grid)
    rep = interlace_check(oscillator(1.0), DIRICHLET, BoundaryMatrix.from_angle(0.0), (0, 6), 11)
    inter = rep["verdict"] == "Pass" and rep["gap_counts"][0] <= 1 and all(g == 1 for g in rep["gap_counts"][1:-1])
    ok = terr < 2e-6 and same and inter
    return ok, (f"transform error {terr:.1e}, continuous sets equal {same} ({len(sets[0])}/{len(grid)}), "
                f"interlacing {rep['verdict']} gaps {rep.get('gap_counts')}")


def criterion_10():
    """Determinant scan against the tridiagonal eigensolve."""
    rng = np.random.default_rng(10)
    worst, counts = 0.0, True
    for i in range(20):
        L = int(rng.integers(2, 201))
        m = JacobiModel(Table(rng.uniform(0.5, 1.5, L + 2)), Table(rng.uniform(-1, 1, L + 2)),
                        Table(rng.uniform(0.5, 2, L + 2)))
        ang = (np.pi / 2 if i % 2 else 0.0) if i % 3 == 0 else rng.uniform(0.1, np.pi - 0.1)
        e = jacobi_truncation_eigs(m, L, ang)
        r = det_root_scan(jacobi_to_symplectic(m), BoundaryMatrix.from_angle(ang), DIRICHLET, L,
                          (e.min() - 1, e.max() + 1))
        if len(r.roots) != len(e):
            counts = False
            worst = np.inf
        else:
            worst = max(worst, float(np.abs(r.roots - e).max()))
    return counts and worst < 1e-8, f"max difference {worst:.1e}, root counts equal {counts}"


def criterion_11():
    """Byte-identical CLI outputs on repeated runs."""
    from weylsym.cli import run

    configs = {
        "free": {"model": {"type": "jacobi", "a": {"kind": "const", "value": 1}, "b": {"kind": "const", "value": 0},
                           "w": {"kind": "const", "value": 1}}, "alpha": {"angle": 1.5707963267948966}},
        "osc": {"model": {"type": "builtin", "name": "oscillator", "params": {"c": 1}},
                "alpha": {"angle": 1.5707963267948966}},
        "rand": {"model": {"type": "random", "n": 2, "seed": 4, "length": 256}},
    }
    commands = [
        ("free", ["mfun", "--grid", "-2", "2", "5", "0.1", "1", "3"]),
        ("free", ["spectrum", "--range", "-3", "3", "--resolution", "13"]),
        ("osc", ["classify", "--lambda0", "0.2538"]),
        ("osc", ["tau", "--points", "0", "1", "2"]),
        ("osc", ["oracle", "--range", "-1", "5", "--size", "300"]),
        ("rand", ["resolve", "--lambda", "0.3+0.4i", "--nout", "50", "--seed", "11"]),
    ]
    mismatched = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for name, cfg in configs.items():
            (tmp / f"{name}.json").write_text(json.dumps(cfg))
        for i, (name, argv) in enumerate(commands):
            dirs = []
            for rep in range(2):
                d = tmp / f"run{i}_{rep}"
                run(argv + ["--config", str(tmp / f"{name}.json"), "--out-dir", str(d)])
                dirs.append(d)
            files = sorted(p.name for p in dirs[0].iterdir())
            if files != sorted(p.name for p in dirs[1].iterdir()):
                mismatched.append((argv[0], "file set"))
                continue
            for f in files:
                a, b = (dirs[0] / f).read_bytes(), (dirs[1] / f).read_bytes()
                if f == "manifest.json":
                    ma, mb = json.loads(a), json.loads(b)
                    ma.pop("wall_time_s"), mb.pop("wall_time_s")
                    same = ma == mb
                else:
                    same = a == b
                if not same:
                    mismatched.append((argv[0], f))
    return not mismatched, f"{len(commands)} commands run twice, mismatches {mismatched}"


CRITERIA = [
    (1, "structural invariants", criterion_01),
    (2, "Weyl circle and nesting", criterion_02),
    (3, "closed-form M_+", criterion_03),
    (4, "Nevanlinna suite", criterion_04),
    (5, "Green kernel and resolvent", criterion_05),
    (6, "continuous classification", criterion_06),
    (7, "discrete classification", criterion_07),
    (8, "Herglotz roundtrip", criterion_08),
    (9, "boundary changes", criterion_09),
    (10, "oracle coherence", criterion_10),
    (11, "CLI determinism", criterion_11),
]


def _check(num: int) -> None:
    _, title, fn = CRITERIA[num - 1]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure of the criterion, reported on its line
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    _report(num, title, ok, detail, t0)
    assert ok, detail


def test_criterion_01_structural_invariants():
    _check(1)


def test_criterion_02_weyl_circle_nesting():
    _check(2)


def test_criterion_03_closed_form_m():
    _check(3)


def test_criterion_04_nevanlinna():
    _check(4)


def test_criterion_05_green_resolvent():
    _check(5)


def test_criterion_06_continuous_classification():
    _check(6)


def test_criterion_07_discrete_classification():
    _check(7)


def test_criterion_08_herglotz_roundtrip():
    _check(8)


def test_criterion_09_boundary_changes():
    _check(9)


def test_criterion_10_oracle_coherence():
    _check(10)


def test_criterion_11_cli_determinism():
    _check(11)


if __name__ == "__main__":
    failed = 0
    for num, _, _ in CRITERIA:
        try:
            _check(num)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
