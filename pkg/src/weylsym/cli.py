"""Command line interface.

Every command reads a JSON config, writes its result files plus a
``manifest.json`` into ``--out-dir`` and returns 0 on success, 2 when a
scan is dominated by undetermined points, and 1 on errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .classify import ClassifyOptions, MSource, classify_point, interlace_check, scan_spectrum, tau_increment
from .core import Affine, BoundaryMatrix, Const, Periodic, SymplecticSystem, Table, validate_system
from .errors import ConfigError, StructureError, WeylError
from .herglotz import HerglotzModel, StepSpectralFunction, semicircle_part
from .models import JacobiModel, builtin, jacobi_to_symplectic, oscillator_model, random_system
from .oracle import det_root_scan, jacobi_truncation_eigs
from .resolvent import defect, psi_norm, resolve

COMMANDS = ("validate", "mfun", "classify", "spectrum", "tau", "resolve", "oracle", "interlace")
UNDETERMINED_LIMIT = 0.5


# --------------------------------------------------------------------------
# Config parsing
# --------------------------------------------------------------------------

def _num(x, path):
    """Numbers, complex strings like ``"1-2j"`` and nested lists of them."""
    if isinstance(x, list):
        return [_num(v, f"{path}[{i}]") for i, v in enumerate(x)]
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise ConfigError(f"{path}: expected a number")
    try:
        return complex(x) if isinstance(x, str) else x
    except ValueError:
        raise ConfigError(f"{path}: cannot parse {x!r} as a number") from None


def _array(x, path):
    a = np.asarray(_num(x, path))
    if a.dtype == object:
        raise ConfigError(f"{path}: ragged array")
    if np.iscomplexobj(a) and np.all(a.imag == 0):
        a = a.real
    return a


def _need(d, key, path):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object")
    if key not in d:
        raise ConfigError(f"{path}.{key}: missing")
    return d[key]


def parse_sequence(spec, path):
    kind = _need(spec, "kind", path)
    if kind == "const":
        return Const(_array(_need(spec, "value", path), f"{path}.value"))
    if kind == "affine":
        return Affine(_array(_need(spec, "offset", path), f"{path}.offset"),
                      _array(_need(spec, "slope", path), f"{path}.slope"))
    if kind == "periodic":
        vals = _array(_need(spec, "values", path), f"{path}.values")
        if vals.ndim == 0 or vals.shape[0] == 0:
            raise ConfigError(f"{path}.values: need at least one value")
        return Periodic(vals)
    if kind == "table":
        vals = _array(_need(spec, "values", path), f"{path}.values")
        tail = _need(spec, "tail", path)
        if tail not in ("repeat-last", "error"):
            raise ConfigError(f"{path}.tail: must be 'repeat-last' or 'error'")
        if vals.ndim == 0 or vals.shape[0] == 0:
            raise ConfigError(f"{path}.values: need at least one value")
        return Table(vals, tail)
    raise ConfigError(f"{path}.kind: unknown")


def parse_model(spec):
    """System or exact M-function model from the ``model`` block."""
    path = "model"
    kind = _need(spec, "type", path)
    try:
        if kind == "jacobi":
            m = JacobiModel(*(parse_sequence(_need(spec, k, path), f"{path}.{k}") for k in "abw"),
                            label=spec.get("label", "jacobi"))
            return jacobi_to_symplectic(m), m
        if kind == "builtin":
            name = _need(spec, "name", path)
            params = spec.get("params", {})
            obj = builtin(name, **params)
            jm = JacobiModel(1.0, 0.0, 1.0) if name == "free_jacobi" else (
                oscillator_model(**params) if name == "oscillator" else None)
            return obj, jm
        if kind == "symplectic":
            n = int(_need(spec, "n", path))
            S = parse_sequence(_need(spec, "S", path), f"{path}.S")
            P = parse_sequence(_need(spec, "Psi", path), f"{path}.Psi")
            return SymplecticSystem(n, S, P, label=spec.get("label", "symplectic")), None
        if kind == "random":
            rng = np.random.default_rng(int(spec.get("seed", 0)))
            return random_system(int(_need(spec, "n", path)), rng, int(spec.get("length", 1024)),
                                 float(spec.get("scale", 0.1))), None
        if kind == "herglotz":
            jumps = _need(spec, "jumps", path)
            t = [float(_need(j, "t", f"{path}.jumps[{i}]")) for i, j in enumerate(jumps)]
            c = [_array(_need(j, "c", f"{path}.jumps[{i}]"), f"{path}.jumps[{i}].c") for i, j in enumerate(jumps)]
            tau = StepSpectralFunction(t, np.array(c))
            w = float(spec.get("semicircle", 0.0))
            return HerglotzModel(tau, spec.get("M0"), spec.get("M1"),
                                 semicircle_part(w) if w else None, label="herglotz"), None
    except ConfigError:
        raise
    except (WeylError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    raise ConfigError(f"{path}.type: unknown")


def parse_boundary(spec, path="alpha"):
    if "angle" in spec:
        return BoundaryMatrix.from_angle(float(spec["angle"]))
    if "matrix" in spec:
        try:
            return BoundaryMatrix(_array(spec["matrix"], f"{path}.matrix"))
        except (StructureError, ValueError):
            raise ConfigError(f"{path}: not in Gamma") from None
    raise ConfigError(f"{path}: expected 'angle' or 'matrix'")


def parse_config(path) -> dict:
    """Read and validate a config file.

    Returns a dict with ``system`` (a system or exact model), ``jacobi``
    (the Jacobi model if any), ``alpha``, ``alpha_hat``, ``beta``,
    ``options``, ``forcing`` and the canonical ``hash``.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: {exc}") from None
    system, jm = parse_model(_need(raw, "model", "config"))
    n = system.n
    out = {"raw": raw, "system": system, "jacobi": jm}
    for key in ("alpha", "alpha_hat", "beta"):
        b = parse_boundary(raw[key], key) if key in raw else None
        if b is not None and b.n != n:
            raise ConfigError(f"{key}: expected {n} rows, got {b.n}")
        out[key] = b
    if out["alpha"] is None:
        if not isinstance(system, SymplecticSystem):
            out["alpha"] = None
        elif n == 1:
            out["alpha"] = BoundaryMatrix.from_angle(np.pi / 2)
        else:
            out["alpha"] = BoundaryMatrix(np.hstack([np.eye(n), np.zeros((n, n))]))
    out["options"] = raw.get("options", {})
    out["forcing"] = raw.get("forcing")
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    out["hash"] = hashlib.sha256(canon.encode()).hexdigest()
    return out


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------

def _f(x) -> str:
    return "" if x is None else format(float(x), ".12g")


def _scalar(M):
    """The entry for ``1 x 1`` matrices, otherwise the trace."""
    M = np.atleast_2d(M)
    return complex(M[0, 0]) if M.shape == (1, 1) else complex(np.trace(M))


def _pairs(M):
    return [[float(v.real), float(v.imag)] for v in np.atleast_2d(np.asarray(M, complex)).ravel()]


class Output:
    def __init__(self, out_dir, run_id):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.run_id = run_id
        self.files = []

    def csv(self, name, header, rows):
        buf = io.StringIO()
        buf.write(f"# run_id={self.run_id}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self._write(name, buf.getvalue())

    def json(self, name, payload):
        payload = {"run_id": self.run_id, **payload}
        self._write(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def _write(self, name, text):
        (self.dir / name).write_text(text, encoding="utf-8")
        self.files.append(name)


def _options(cfg, args) -> ClassifyOptions:
    o = dict(cfg["options"])
    flags = {"tol": args.tol, "nu0": args.nu0, "ratio": args.nu_ratio, "count": args.nu_count,
             "N_max": args.nmax, "seed": args.seed}
    alias = {"nu_ratio": "ratio", "nu_count": "count", "nmax": "N_max"}
    o = {alias.get(k, k): v for k, v in o.items()}
    o.update({k: v for k, v in flags.items() if v is not None})
    known = set(asdict(ClassifyOptions()))
    bad = sorted(set(o) - known)
    if bad:
        raise ConfigError(f"options.{bad[0]}: unknown")
    return ClassifyOptions(**o)


def _need_system(cfg, command):
    if not isinstance(cfg["system"], SymplecticSystem):
        raise ConfigError(f"model.type: '{command}' needs a symplectic system")
    return cfg["system"]


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_validate(cfg, args, out, opts):
    sys_ = _need_system(cfg, "validate")
    rep = validate_system(sys_, args.kmax, opts.tol)
    out.json("validation.json", {"passed": rep.passed, "failed": rep.failed(), **rep.to_dict()})
    return 0 if rep.passed else 1


def _complex_arg(s):
    return complex(s.replace("i", "j").replace(" ", ""))


def cmd_mfun(cfg, args, out, opts):
    src = MSource(cfg["system"], cfg["alpha"], opts.tol, opts.N_max, opts.seed)

    def record(lam):
        if src.exact:
            return {"lambda": [lam.real, lam.imag], "value": _pairs(src(lam)), "N_used": 0,
                    "diameter": 0.0, "converged": True}
        ev = src.wf.evaluate(lam)
        return {"lambda": [lam.real, lam.imag], "value": _pairs(ev.value), "N_used": int(ev.N_used),
                "diameter": float(ev.diameter), "converged": bool(ev.converged)}

    if args.grid is None:
        if args.lam is None:
            raise ConfigError("mfun: need --lambda or --grid")
        rec = record(_complex_arg(args.lam))
        out.json("mfun.json", rec)
        return 0 if rec["converged"] else 1
    r0, r1, nr, i0, i1, ni = args.grid
    recs = [record(complex(x, y)) for y in np.linspace(i0, i1, int(ni)) for x in np.linspace(r0, r1, int(nr))]
    if args.format == "json":
        out.json("mfun.json", {"records": recs})
    else:
        rows = []
        for r in recs:
            v = r["value"]
            re = ";".join(_f(p[0]) for p in v)
            im = ";".join(_f(p[1]) for p in v)
            rows.append([_f(r["lambda"][0]), _f(r["lambda"][1]), re, im, r["N_used"], _f(r["diameter"])])
        out.csv("mfun.csv", ["re", "im", "M_re", "M_im", "N_used", "diameter"], rows)
    return 0


def cmd_classify(cfg, args, out, opts):
    if args.lambda0 is None:
        raise ConfigError("classify: need --lambda0")
    rec = classify_point(cfg["system"], cfg["alpha"], args.lambda0, opts)
    out.json("classification.json", rec.to_dict())
    return 2 if rec.verdict == "Undetermined" else 0


def _spectrum_row(r):
    L = _scalar(r.L_hat)
    K = None if r.K_minus1 is None else _scalar(r.K_minus1).real
    D = "divergent" if r.divergent else (None if r.density_hat is None else _f(_scalar(r.density_hat).real))
    res = r.diagnostics.get("L_residual")
    return [_f(r.lambda0), r.verdict, _f(L.real), _f(L.imag), _f(K), "" if D is None else D, _f(res)]


def cmd_spectrum(cfg, args, out, opts):
    if args.range is None:
        raise ConfigError("spectrum: need --range A B")
    sm = scan_spectrum(cfg["system"], cfg["alpha"], tuple(args.range), args.resolution, opts)
    eig = [{"lambda_star": float(r.diagnostics["lambda_star"]), "K_minus1": _pairs(r.K_minus1)}
           for r in sm.eigenvalues]
    emb = [{"lambda_star": float(r.diagnostics["lambda_star"])} for r in sm.embedded]
    if args.format == "json":
        out.json("spectrum.json", {"records": [r.to_dict() for r in sm.records], "eigenvalues": eig,
                                   "embedded": emb})
    else:
        out.csv("spectrum.csv", ["lambda0", "verdict", "L_re", "L_im", "Kminus1", "density_im", "residual"],
                [_spectrum_row(r) for r in sm.records])
        out.json("eigenvalues.json", {"eigenvalues": eig, "embedded": emb})
    return 2 if sm.undetermined_fraction > UNDETERMINED_LIMIT else 0


def cmd_tau(cfg, args, out, opts):
    pts = args.points
    if not pts or len(pts) < 2:
        raise ConfigError("tau: need --points T0 T1 [T2 ...]")
    rows = []
    for t1, t2 in zip(pts[:-1], pts[1:]):
        inc = tau_increment(cfg["system"], cfg["alpha"], t1, t2, opts=opts)
        rows.append((t1, t2, _scalar(inc).real))
    if args.format == "json":
        out.json("tau.json", {"increments": [{"t1": a, "t2": b, "increment": c} for a, b, c in rows]})
    else:
        out.csv("tau.csv", ["t1", "t2", "increment"], [[_f(a), _f(b), _f(c)] for a, b, c in rows])
    return 0


def cmd_resolve(cfg, args, out, opts):
    sys_ = _need_system(cfg, "resolve")
    n = sys_.n
    if args.lam is None:
        raise ConfigError("resolve: need --lambda")
    lam = _complex_arg(args.lam)
    fc = cfg["forcing"]
    if fc is None:
        rng = np.random.default_rng(opts.seed)
        F = rng.standard_normal((8, 2 * n)) + 1j * rng.standard_normal((8, 2 * n))
        start, xi = 0, np.zeros(n)
    else:
        F = _array(_need(fc, "values", "forcing"), "forcing.values").astype(complex)
        start = int(fc.get("start", 0))
        xi = _array(fc.get("xi", [0] * n), "forcing.xi")
    if F.ndim != 2 or F.shape[1] != 2 * n:
        raise ConfigError(f"forcing.values: expected rows of length {2 * n}")
    Ffull = np.zeros((start + F.shape[0], 2 * n), complex)
    Ffull[start:] = F
    z = resolve(sys_, cfg["alpha"], lam, Ffull, xi, args.nout, tol=opts.tol)
    d = defect(sys_, lam, z, Ffull)
    nz, nf = psi_norm(sys_, z), psi_norm(sys_, Ffull)
    Z = z.values[..., 0]
    out.json("resolve.json", {
        "lambda": [lam.real, lam.imag], "N_out": args.nout, "defect_max": float(d.max()),
        "norm_z": nz, "norm_f": nf,
        "bound_ratio": nz * abs(lam.imag) / nf if nf > 0 and lam.imag != 0 else None,
        "boundary_residual": float(np.abs(cfg["alpha"].matrix @ Z[0] - xi).max()),
    })
    rows = [[k, i, _f(Z[k, i].real), _f(Z[k, i].imag)] for k in range(Z.shape[0]) for i in range(2 * n)]
    out.csv("resolve.csv", ["k", "i", "re", "im"], rows)
    return 0


def cmd_oracle(cfg, args, out, opts):
    sys_ = _need_system(cfg, "oracle")
    if args.range is None:
        raise ConfigError("oracle: need --range A B")
    a, b = args.range
    beta = cfg["beta"] or (BoundaryMatrix.from_angle(np.pi / 2) if sys_.n == 1 else None)
    if beta is None:
        raise ConfigError("beta: required for n > 1")
    scan = det_root_scan(sys_, cfg["alpha"], beta, args.size, (a, b))
    tri = None
    al = cfg["alpha"]
    if cfg["jacobi"] is not None and al.angle is not None and abs(beta.matrix[0, 1]) < 1e-14:
        e = jacobi_truncation_eigs(cfg["jacobi"], args.size, al.angle)
        tri = e[(e >= a) & (e <= b)]
    m = max(len(scan.roots), 0 if tri is None else len(tri))
    rows = []
    for i in range(m):
        rows.append([i, _f(tri[i]) if tri is not None and i < len(tri) else "",
                     _f(scan.roots[i]) if i < len(scan.roots) else ""])
    out.csv("oracle.csv", ["index", "tridiagonal", "det_scan"], rows)
    agree = None
    if tri is not None:
        agree = bool(len(tri) == len(scan.roots) and (len(tri) == 0 or np.abs(tri - scan.roots).max() < 1e-8))
    out.json("oracle.json", {"size": args.size, "range": [a, b], "det_roots": scan.roots.tolist(),
                             "tridiagonal": None if tri is None else tri.tolist(),
                             "suspect": scan.suspect, "agree": agree})
    return 0 if agree in (None, True) else 1


def cmd_interlace(cfg, args, out, opts):
    if cfg["alpha_hat"] is None:
        raise ConfigError("alpha_hat: missing")
    if args.range is None:
        raise ConfigError("interlace: need --range A B")
    rep = interlace_check(cfg["system"], cfg["alpha"], cfg["alpha_hat"], tuple(args.range), args.resolution, opts)
    out.json("interlace.json", rep)
    return {"Pass": 0, "Fail": 1}.get(rep["verdict"], 2)


_DISPATCH = {
    "validate": cmd_validate, "mfun": cmd_mfun, "classify": cmd_classify, "spectrum": cmd_spectrum,
    "tau": cmd_tau, "resolve": cmd_resolve, "oracle": cmd_oracle, "interlace": cmd_interlace,
}


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weylsym", description="Weyl-Titchmarsh functions and spectral "
                                "classification for discrete symplectic systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, metavar="JSON")
    p.add_argument("--out-dir", default=".", metavar="DIR")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tol", type=float)
    p.add_argument("--nu0", type=float)
    p.add_argument("--nu-ratio", type=float)
    p.add_argument("--nu-count", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--lambda", dest="lam", metavar="Z", help="complex point, e.g. 0+1i")
    p.add_argument("--lambda0", type=float, metavar="X")
    p.add_argument("--grid", type=float, nargs=6, metavar=("RE0", "RE1", "NRE", "IM0", "IM1", "NIM"))
    p.add_argument("--range", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--resolution", type=int, default=61)
    p.add_argument("--points", type=float, nargs="+", metavar="T")
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--nout", type=int, default=500)
    p.add_argument("--kmax", type=int, default=1000)
    return p


def _argv_key(args) -> dict:
    d = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "out_dir")}
    return d


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = parse_config(args.config)
        opts = _options(cfg, args)
        key = json.dumps({"config": cfg["hash"], "args": _argv_key(args), "version": __version__},
                         sort_keys=True)
        run_id = hashlib.sha256(key.encode()).hexdigest()[:16]
        out = Output(args.out_dir, run_id)
        code = _DISPATCH[args.command](cfg, args, out, opts)
    except (WeylError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = {
        "run_id": run_id,
        "tool_version": __version__,
        "command": args.command,
        "config_hash": cfg["hash"],
        "flags": _argv_key(args),
        "tolerances": {"tol": opts.tol, "eps_L_rel": opts.eps_L_rel, "eps_im": opts.eps_im,
                       "eps_tau": opts.eps_tau},
        "nu_schedule": opts.schedule().tolist(),
        "N_max": opts.N_max,
        "seed": opts.seed,
        "outputs": out.files,
        "exit_code": code,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    (out.dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
