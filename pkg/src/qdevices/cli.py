"""Command-line front end: batch tables and curves as CSV/JSON.

Commands: ``devices``, ``scaling``, ``rstar``, ``povm``, ``deco``, ``demo``.
Every CSV starts with a ``#`` comment recording the invocation, then a
header row; floats carry 12 significant digits, ``M = inf`` rows spell
``inf``, and empty cells mean "no value" (e.g. no superbroadcasting
threshold).  Exit codes: 0 success, 2 domain errors, 3 invariant
violations.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import devices, superbroadcast
from .decoherence import (
    invert_by_feedback,
    phase_kick,
    phase_kick_info,
    random_unitary_decomp,
    schur_apply,
)
from .exceptions import (
    ContractError,
    DecompositionError,
    DomainError,
    InvariantError,
    NotCPError,
    QDevicesError,
    ShapeError,
    SizeCapError,
    TheoremScopeError,
)
from .linalg import trace_distance, validate_density
from .povm import (
    is_observable,
    is_postprocessing_clean,
    is_preprocessing_clean,
    postprocessing_reachable,
    povm_validate,
    repeatable_run,
    truncated_repeatable,
)
from .serialization import load, matrix_from_json, matrix_to_json, povm_from_json

DOMAIN_ERRORS = (DomainError, SizeCapError, TheoremScopeError, ShapeError)
INVARIANT_ERRORS = (InvariantError, NotCPError, ContractError, DecompositionError)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return f"{x:.12g}"
    return str(x)


def _emit(args, header, rows, comments=()):
    """Write a table as CSV (with config comment) or JSON."""
    if args.format == "json":
        payload = [dict(zip(header, row)) for row in rows]
        text = json.dumps(payload, indent=1, default=_fmt) + "\n"
    else:
        lines = [f"# config: {' '.join(_fmt(c) for c in comments)}"] if comments else []
        lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_range(spec: str) -> list[int]:
    """``'a'`` or ``'a:b'`` (inclusive) or ``'a:b:step'``."""
    parts = [int(p) for p in spec.split(":")]
    if len(parts) == 1:
        return parts
    if len(parts) == 2:
        return list(range(parts[0], parts[1] + 1))
    return list(range(parts[0], parts[1] + 1, parts[2]))


def _parse_m(spec: str):
    return math.inf if spec.lower() in ("inf", "infinity") else int(spec)


def _parse_m_range(spec: str) -> list:
    if spec.lower() in ("inf", "infinity"):
        return [math.inf]
    vals: list = []
    for chunk in spec.split(","):
        if chunk.lower() in ("inf", "infinity"):
            vals.append(math.inf)
        else:
            vals.extend(_parse_range(chunk))
    return vals


# ---------------------------------------------------------------------------
# devices
# ---------------------------------------------------------------------------

def cmd_devices(args) -> int:
    rows = []
    comments = ["devices", args.device, f"d={args.d}", f"N={args.n}", f"M={args.m_range}"]
    if args.device in ("unot", "phase-not"):
        fn = devices.unot_fidelity if args.device == "unot" else devices.phase_not_fidelity
        rows.append((args.device, args.d, "", "", float(fn(args.d))))
    else:
        if not args.m_range:
            raise DomainError("cloning devices need --M-range")
        fn = devices.uclone_fidelity if args.device == "universal-clone" else devices.pclone_fidelity
        for m in _parse_range(args.m_range):
            try:
                rows.append((args.device, args.d, args.n, m,
                             float(fn(devices.CloneSpec(args.d, args.n, m)))))
            except DOMAIN_ERRORS as exc:
                # per-row failure (cap or M = N + kd constraint): report, keep going
                comments.append(f"skip M={m}: {exc}")
    _emit(args, ("device", "d", "N", "M", "fidelity"), rows, comments)
    return 0


# ---------------------------------------------------------------------------
# scaling / rstar
# ---------------------------------------------------------------------------

def cmd_scaling(args) -> int:
    m = _parse_m(args.m)
    grid = [(i + 1) / args.grid for i in range(args.grid)]
    rows = []
    for r in grid:
        res = superbroadcast.scaling(args.flavor, args.n, m, r)
        rows.append((args.flavor, args.n, float(m) if m is math.inf else m, r, res.p))
    _emit(args, ("flavor", "N", "M", "r", "p"), rows,
          ["scaling", args.flavor, f"N={args.n}", f"M={args.m}", f"grid={args.grid}"])
    return 0


def cmd_rstar(args) -> int:
    rows = []
    for n in _parse_range(args.n_range):
        for m in _parse_m_range(args.m_range):
            if m is not math.inf and m <= n:
                continue
            rs = superbroadcast.r_star(n, m, args.flavor)
            rows.append((args.flavor, n, float(m) if m is math.inf else m,
                         rs if rs is None else float(rs)))
    _emit(args, ("flavor", "N", "M", "r_star"), rows,
          ["rstar", args.flavor, f"N={args.n_range}", f"M={args.m_range}"])
    return 0


# ---------------------------------------------------------------------------
# povm
# ---------------------------------------------------------------------------

def cmd_povm(args) -> int:
    if args.action == "check":
        p = povm_from_json(load(args.files[0]))
        diag = povm_validate(p)
        report = {
            "valid": diag.valid,
            "sum_defect": diag.sum_defect,
            "min_eigenvalues": list(diag.min_eigenvalues),
            "observable": is_observable(p),
            "postprocessing_clean": is_postprocessing_clean(p),
        }
        try:
            report["preprocessing_clean"] = is_preprocessing_clean(p)
        except TheoremScopeError as exc:
            report["preprocessing_clean"] = f"undecided: {exc}"
        sys.stdout.write(json.dumps(report, indent=1, default=str) + "\n")
        return 0
    if args.action == "reach":
        p = povm_from_json(load(args.files[0]))
        q = povm_from_json(load(args.files[1]))
        res = postprocessing_reachable(p, q)
        if res.reachable:
            out = {"reachable": True, "witness": [[float(x) for x in row] for row in res.witness]}
        else:
            cert = None if res.certificate is None else [float(x) for x in res.certificate]
            out = {"reachable": False, "farkas_certificate": cert}
        sys.stdout.write(json.dumps(out, indent=1) + "\n")
        return 0
    raise DomainError(f"unknown povm action {args.action!r}")


# ---------------------------------------------------------------------------
# deco
# ---------------------------------------------------------------------------

def _load_state(path: str | None, default_dim: int = 2) -> np.ndarray:
    if path is None:
        plus = np.full(default_dim, 1.0 / math.sqrt(default_dim), dtype=complex)
        return np.outer(plus, plus.conj())
    rho = matrix_from_json(load(path))
    validate_density(rho)
    return rho


def cmd_deco(args) -> int:
    if args.action == "info":
        bits = phase_kick_info(args.lam)
        sys.stdout.write(json.dumps({"lambda": args.lam, "bits": bits}) + "\n")
        return 0
    if args.action == "run":
        xi = phase_kick(args.lam)
        rho = _load_state(args.state)
        if rho.shape != (2, 2):
            raise DomainError("deco run drives the qubit phase-kick model; provide a 2x2 state")
        rows = []
        state = rho
        for step in range(args.steps + 1):
            rows.append((step, abs(state[0, 1])))
            state = schur_apply(xi, state)
        _emit(args, ("step", "abs_offdiag"), rows,
              ["deco run", f"lambda={args.lam}", f"steps={args.steps}"])
        return 0
    if args.action == "invert":
        xi = phase_kick(args.lam)
        rho = _load_state(args.state)
        decomp = random_unitary_decomp(xi)
        noisy = schur_apply(xi, rho)
        result = invert_by_feedback(decomp, rho)
        report = {
            "lambda": args.lam,
            "bits_used": result.bits_used,
            "trace_distance_noisy": trace_distance(noisy, rho),
            "trace_distance_recovered": trace_distance(result.recovered, rho),
        }
        sys.stdout.write(json.dumps(report, indent=1) + "\n")
        return 0
    raise DomainError(f"unknown deco action {args.action!r}")


# ---------------------------------------------------------------------------
# demo
# ---------------------------------------------------------------------------

def cmd_demo(args) -> int:
    if args.action != "repeatable":
        raise DomainError(f"unknown demo {args.action!r}")
    tr = truncated_repeatable(args.levels, args.p)
    psi = np.zeros(args.levels)
    psi[0] = 1.0
    rng = np.random.default_rng(args.seed)
    records = repeatable_run(tr, psi, args.reps, rng)
    rows = [(r["rep"], r["outcome"], r["p0"], r["p1"]) for r in records]
    _emit(args, ("rep", "outcome", "p0", "p1"), rows,
          ["demo repeatable", f"D={args.levels}", f"p={args.p}",
           f"reps={args.reps}", f"seed={args.seed}"])
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdevices", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized demos")

    p = sub.add_parser("devices", help="closed-form fidelity tables")
    p.add_argument("--device", required=True,
                   choices=("universal-clone", "phase-clone", "unot", "phase-not"))
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", dest="n", type=int, default=1)
    p.add_argument("--M-range", dest="m_range", default=None,
                   help="M or a:b range (cloning devices)")
    common(p)
    p.set_defaults(func=cmd_devices)

    p = sub.add_parser("scaling", help="superbroadcasting scaling curve p(r)")
    p.add_argument("--flavor", choices=("universal", "phase"), required=True)
    p.add_argument("--N", dest="n", type=int, required=True)
    p.add_argument("--M", dest="m", required=True, help="integer or 'inf'")
    p.add_argument("--grid", type=int, default=100, help="number of r points in (0, 1]")
    common(p)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("rstar", help="superbroadcasting thresholds r*(N, M)")
    p.add_argument("--flavor", choices=("universal", "phase"), required=True)
    p.add_argument("--N-range", dest="n_range", required=True, help="a or a:b")
    p.add_argument("--M-range", dest="m_range", required=True,
                   help="a, a:b, comma list, or 'inf'")
    common(p)
    p.set_defaults(func=cmd_rstar)

    p = sub.add_parser("povm", help="POVM diagnostics and postprocessing reachability")
    p.add_argument("action", choices=("check", "reach"))
    p.add_argument("files", nargs="+", help="POVM JSON file(s)")
    common(p)
    p.set_defaults(func=cmd_povm)

    p = sub.add_parser("deco", help="phase-kick decoherence: run, info, invert")
    p.add_argument("action", choices=("run", "info", "invert"))
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--state", default=None, help="density-matrix JSON (default |+><+|)")
    common(p)
    p.set_defaults(func=cmd_deco)

    p = sub.add_parser("demo", help="truncated repeatable-measurement demonstrator")
    p.add_argument("action", choices=("repeatable",))
    p.add_argument("--D", dest="levels", type=int, default=12)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--reps", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INVARIANT_ERRORS as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return 3
    except DOMAIN_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except QDevicesError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
