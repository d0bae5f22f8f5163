"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 bad input, 3 dimension
mismatch, 4 construction failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from typing import Optional

import numpy as np

from . import __version__
from .errors import (ConventionCheckFailed, DimensionMismatch, EvenDimension,
                     HWRelationViolated, NonUnitaryTransform, SSRCError)
from .fock import DensityMatrix, SSRCState, spin_coherent, binomial_width_check

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_DIM, EXIT_BUILD = 0, 1, 2, 3, 4


class CLIError(Exception):
    def __init__(self, msg: str, code: int = EXIT_INPUT):
        super().__init__(msg)
        self.code = code


def atomic_write(path: str, text: str):
    """Write via a temp file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(path: Optional[str], text: str):
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        atomic_write(path, text)


def manifest(args, **extra) -> dict:
    m = {"command": args.command, "tool_version": __version__,
         "seed": getattr(args, "seed", None),
         "conventions": {"weyl": args.convention, "kernel_prefactor": args.prefactor,
                         "kappa": args.kappa},
         "inputs": [p for p in (getattr(args, "state", None), getattr(args, "config", None)) if p],
         "output": getattr(args, "out", None)}
    m.update(extra)
    return m


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


# ---- state -----------------------------------------------------------------

def _state_doc(args) -> str:
    fam = args.family
    if fam == "maximally-mixed":
        if args.N is None:
            raise CLIError("--N is required")
        rho = DensityMatrix.maximally_mixed(args.N).rho
        doc = {"N": args.N, "rho": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
               "manifest": manifest(args)}
        return _dumps(doc)
    if fam == "qudit-basis":
        if args.d is None or args.j is None:
            raise CLIError("--d and --j are required")
        from .encoding import fock_index
        st = SSRCState.fock(args.d - 1, fock_index(args.j, args.d - 1))
        return st.to_json(manifest(args))
    if args.N is None:
        raise CLIError("--N is required")
    if fam == "fock":
        st = SSRCState.fock(args.N, args.n)
    elif fam == "spin-coherent":
        st = spin_coherent(args.N, args.theta, args.phi)
    elif fam == "coherent-truncated":
        from .wigner_plane import coherent_coeffs
        st = SSRCState.from_vector(coherent_coeffs(complex(args.alpha), args.N))
    elif fam == "random-pure":
        rng = np.random.default_rng(args.seed)
        v = rng.normal(size=args.N + 1) + 1j * rng.normal(size=args.N + 1)
        st = SSRCState.from_vector(v)
    else:
        raise CLIError(f"unknown family {fam!r}")
    return st.to_json(manifest(args))


def cmd_state(args) -> int:
    emit(args.out, _state_doc(args))
    return EXIT_OK


def read_state(path: str):
    """SSRCState or DensityMatrix from a JSON file written by ``state``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CLIError(f"cannot read state file {path}: {exc}")
    try:
        if "rho" in doc:
            rho = np.array([[complex(re, im) for re, im in row] for row in doc["rho"]])
            return DensityMatrix(int(doc["N"]), rho)
        return SSRCState.from_json(json.dumps(doc))
    except DimensionMismatch as exc:
        raise CLIError(str(exc), EXIT_DIM)
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"malformed state file {path}: {exc}")


# ---- wigner ----------------------------------------------------------------

def cmd_wigner(args) -> int:
    st = read_state(args.state)
    rho = st.rho if isinstance(st, DensityMatrix) else np.outer(st.coeffs, st.coeffs.conj())
    m = manifest(args, geometry=args.geometry)
    if args.geometry == "sphere":
        from .wigner_sphere import sphere_negativity, wigner_sphere
        g = wigner_sphere(rho, n_theta=args.n_theta, n_phi=args.n_phi,
                          prefactor=args.prefactor, axis=args.axis)
        summary = {"normalization": g.integral(), "negativity": sphere_negativity(g),
                   "max": float(g.values.max()), "argmax": list(g.argmax())}
        text = g.to_csv({"manifest": m})
    elif args.geometry == "plane":
        from .wigner_plane import default_axis, plane_negativity, wigner_plane
        n_max = rho.shape[0] - 1
        ax = default_axis(n_max, args.points)
        if args.extent is not None:
            ax = np.linspace(-args.extent, args.extent, args.points)
        g = wigner_plane(rho, ax, ax)
        summary = {"normalization": g.integral(), "Z_W": g.normalization,
                   "negativity": plane_negativity(g),
                   "max": float(g.values.max()), "argmax": list(g.argmax())}
        text = g.to_csv({"manifest": m})
    else:
        from .wigner_discrete import discrete_negativity, weyl_operators, wigner_discrete
        d = rho.shape[0]
        try:
            pps = weyl_operators(d, args.convention)
        except EvenDimension as exc:
            raise CLIError(str(exc), EXIT_DIM)
        lat = wigner_discrete(rho, pps)
        i, j = np.unravel_index(np.argmax(lat.values), lat.values.shape)
        summary = {"normalization": float(lat.values.sum()),
                   "negativity": discrete_negativity(lat), "imag_residue": lat.imag_residue,
                   "max": float(lat.values.max()), "argmax": [int(i), int(j)]}
        text = lat.to_csv({"manifest": m})
    emit(args.out, text)
    summary["manifest"] = m
    if args.summary is None:
        # keep stdout for the CSV when it goes there
        if args.out in (None, "-"):
            sys.stderr.write(_dumps(summary) + "\n")
        else:
            emit("-", _dumps(summary))
    else:
        emit(args.summary, _dumps(summary))
    return EXIT_OK


# ---- encode ----------------------------------------------------------------

def _transform(spec: str, N: int):
    from .encoding import PRESETS
    if spec in PRESETS:
        return spec
    try:
        raw = np.load(spec) if spec.endswith(".npy") else None
        if raw is None:
            with open(spec, encoding="utf-8") as fh:
                raw = np.array([[complex(re, im) for re, im in row] for row in json.load(fh)])
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise CLIError(f"cannot read transform {spec!r}: {exc}")
    return raw


def cmd_encode(args) -> int:
    from .encoding import build_encoding
    K, U = _transform(args.K, args.N), _transform(args.U, args.N)
    try:
        enc = build_encoding(args.N, K, U)
    except (HWRelationViolated, NonUnitaryTransform) as exc:
        raise CLIError(str(exc), EXIT_BUILD)
    except DimensionMismatch as exc:
        raise CLIError(str(exc), EXIT_DIM)
    man = manifest(args)
    report = enc.manifest()
    report.update({"hw_defect": enc.checks["hw_defect"], "kappa_class": enc.kappa_class,
                   "phase_bookkeeping": {"global_phase": [enc.global_phase.real,
                                                          enc.global_phase.imag],
                                         "relabeling": "j = (-n) mod (N+1)"},
                   "manifest": man})
    vac = enc.K @ np.eye(args.N + 1)[:, 0]
    report["new_vacuum_fock_index"] = int(np.argmax(np.abs(vac)))
    if args.basis_out:
        basis = {"N": args.N, "manifest": man,
                 "basis": [[[float(z.real), float(z.imag)] for z in b.coeffs] for b in enc.basis]}
        atomic_write(args.basis_out, _dumps(basis))
        report["basis_file"] = args.basis_out
    emit(args.out, _dumps(report))
    return EXIT_OK


# ---- verify ----------------------------------------------------------------

def _verify_sw(args) -> dict:
    from .wigner_sphere import build_kernel, sw_residuals
    out = {}
    for N in args.N_list or [8]:
        try:
            k = build_kernel(N, args.prefactor)
        except ConventionCheckFailed as exc:
            out[f"N={N}"] = {"error": str(exc), "traciality": float("inf")}
            continue
        out[f"N={N}"] = k.checks or sw_residuals(N, k.delta0)
    return out


def _verify_hw(args) -> dict:
    from .encoding import build_encoding
    out = {}
    for d in args.d_list or [3, 5, 7]:
        for K in ("identity", "rot_pi_y", "theta_z_half"):
            for U in ("identity", "rot_pi_y", "theta_z_half"):
                try:
                    out[f"d={d},K={K},U={U}"] = {"hw_defect": build_encoding(d - 1, K, U).checks["hw_defect"]}
                except HWRelationViolated as exc:
                    out[f"d={d},K={K},U={U}"] = {"hw_defect": float("inf"), "error": str(exc)}
    return out


def _verify_hudson(args) -> dict:
    from .wigner_discrete import clifford_positivity_scan
    out = {}
    for d in args.d_list or [3, 5, 7]:
        r = clifford_positivity_scan(d, max_length=args.length, convention=args.convention)
        out[f"d={d}"] = {"max_negativity": r.max_negativity, "checked": r.checked,
                         "violations": len(r.violations)}
    return out


def _verify_cv_limits(args) -> dict:
    from .cvlimit import run_sweep
    Ns = [100, 400] if args.quick else [100, 400, 1600]
    plan = [("coherent-limit", {"alpha": [1.0]}, None),
            ("rotation-displacement", {"q": [0.5]}, "vacuum"),
            ("xx-displacement", {}, "vacuum"),
            ("pegg-barnett", {"alpha": [1.0]}, "coherent")]
    out = {}
    for exp, grid, fam in plan:
        recs = run_sweep(exp, Ns, grid, fam)
        out[exp] = {"errors": [r.error for r in recs], "N": [r.N for r in recs],
                    "monotone": all(r.monotone for r in recs)}
    out["binomial_width_400"] = {"fraction": binomial_width_check(400)}
    return out


def _passed(suite: str, res: dict, tol: float) -> bool:
    if suite == "sw-axioms":
        return all(max(x for x in v.values() if isinstance(x, float)) <= tol
                   for v in res.values())
    if suite == "hw-relations":
        return all(v["hw_defect"] <= 1e-9 for v in res.values())
    if suite == "hudson":
        return all(v["violations"] == 0 for v in res.values())
    ok = all(v["monotone"] for k, v in res.items() if k != "binomial_width_400")
    return ok and 0.95 <= res["binomial_width_400"]["fraction"] <= 0.96


def cmd_verify(args) -> int:
    runner = {"sw-axioms": _verify_sw, "hw-relations": _verify_hw,
              "hudson": _verify_hudson, "appendices": _verify_cv_limits}[args.suite]
    res = runner(args)
    ok = _passed(args.suite, res, 1e-6)
    emit(args.out, _dumps({"suite": args.suite, "passed": ok, "checks": res,
                           "manifest": manifest(args)}))
    return EXIT_OK if ok else EXIT_VERIFY


# ---- sweep -----------------------------------------------------------------

def cmd_sweep(args) -> int:
    from .cvlimit import load_sweep_config, records_to_csv, run_sweep
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = load_sweep_config(fh.read())
        Ns = [int(n) for n in cfg["N_list"]]
    except (OSError, ValueError, TypeError) as exc:
        raise CLIError(f"malformed sweep config: {exc}")
    recs = run_sweep(cfg["experiment"], Ns, cfg["params"], cfg["state_family"])
    emit(args.out, records_to_csv(recs, {"manifest": manifest(args, sweep=cfg)}))
    return EXIT_OK


# ---- parser ----------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--convention", default="symmetric-half",
                        choices=["symmetric-half", "paper-literal"],
                        help="Weyl phase convention for discrete phase points")
    common.add_argument("--prefactor", default="auto", choices=["auto", "2l+1", "l+1"],
                        help="spherical kernel multipole weight")
    common.add_argument("--kappa", type=float, default=0.1, help="CV-regime threshold")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")

    p = _Parser(prog="ssrcphase", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("state", parents=[common], help="write a normalized state file")
    s.add_argument("--family", required=True,
                   choices=["fock", "spin-coherent", "coherent-truncated", "qudit-basis",
                            "random-pure", "maximally-mixed"])
    s.add_argument("--N", type=int)
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--alpha", type=complex, default=1.0)
    s.add_argument("--d", type=int)
    s.add_argument("--j", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_state)

    w = sub.add_parser("wigner", parents=[common], help="evaluate a Wigner function to CSV")
    w.add_argument("geometry", choices=["sphere", "plane", "torus"])
    w.add_argument("--state", required=True)
    w.add_argument("--summary", default=None, help="summary JSON path (default: stdout, or stderr when the CSV goes to stdout)")
    w.add_argument("--n-theta", type=int, default=None)
    w.add_argument("--n-phi", type=int, default=None)
    w.add_argument("--axis", default="x", choices=["x", "y"])
    w.add_argument("--points", type=int, default=201)
    w.add_argument("--extent", type=float, default=None)
    w.set_defaults(func=cmd_wigner)

    e = sub.add_parser("encode", parents=[common], help="build and check a qudit encoding")
    e.add_argument("--N", type=int, required=True)
    e.add_argument("--K", default="identity")
    e.add_argument("--U", default="identity")
    e.add_argument("--basis-out", default=None)
    e.set_defaults(func=cmd_encode)

    v = sub.add_parser("verify", parents=[common], help="run a property suite")
    v.add_argument("suite", choices=["sw-axioms", "hw-relations", "hudson", "appendices"])
    v.add_argument("--N", dest="N_list", type=_int_list, default=None)
    v.add_argument("--d", dest="d_list", type=_int_list, default=None)
    v.add_argument("--length", type=int, default=4)
    v.add_argument("--quick", action="store_true")
    v.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", parents=[common], help="run a CV-limit sweep from config")
    sw.add_argument("config")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DimensionMismatch, EvenDimension) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except SSRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
