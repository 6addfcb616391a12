"""Command-line front end: one subcommand per module operation plus `verify` campaigns.

Every command writes a JSON report (schema "1") to stdout or --output. Exit codes:
0 success, 1 verification failure or uncertified result, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from . import __version__, bounds, campaigns, charsums, dwork, geometry, series
from .fields import CapExceeded
from .geometry import PolySystem

SCHEMA = "1"
EXACT = "exact"


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    system: str | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)
    output: str | None = None
    fmt: str = "json"
    timing: bool = False

    def __post_init__(self):
        for k, v in self.params.items():
            if k in ("terms", "pade", "m", "precision", "degree", "traces", "range") and v is not None and v < 1:
                raise InputError(f"--{k} must be positive")

    def echo(self) -> dict:
        return {"command": self.command, "system": self.system, "seed": self.seed,
                "params": self.params}


# --- helpers -----------------------------------------------------------------

def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"{what}: expected comma-separated integers, got {text!r}") from exc


def load_system(path: str) -> tuple[PolySystem, str]:
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 text") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: top-level value must be an object")
    try:
        return PolySystem.from_json(data), digest
    except (geometry.SystemError_, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _default(o):
    if isinstance(o, Fraction):
        return str(o) if o.denominator != 1 else o.numerator
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def render_table(report: dict) -> str:
    lines = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in v:
                walk(f"{prefix}.{k}" if prefix else str(k), v[k])
        elif isinstance(v, list) and v and any(isinstance(x, (dict, list)) for x in v):
            for i, x in enumerate(v):
                walk(f"{prefix}[{i}]", x)
        else:
            lines.append(f"{prefix:<48} {json.dumps(v, default=_default)}")

    walk("", report)
    return "\n".join(lines) + "\n"


def _all_subsets(r: int):
    for k in range(r + 1):
        yield from combinations(range(1, r + 1), k)


# --- commands ----------------------------------------------------------------
# Each returns (results, verdict) with verdict in {"pass", "fail", "n/a"}.

def cmd_count(cfg, system):
    P = cfg.params
    subset = tuple(P["subset"]) if P["subset"] is not None else tuple(range(1, system.r + 1))
    if any(i < 1 or i > system.r for i in subset):
        raise InputError(f"subset {list(subset)} out of range 1..{system.r}")
    N = geometry.count(system, subset, P["m"], P["region"])
    return {"subset": list(subset), "m": P["m"], "region": P["region"], "q_m": system.q ** P["m"],
            "count": N, "precision": EXACT}, "n/a"


def _zeta_for(system, subset, M, region="affine"):
    counts = [geometry.count(system, subset, m, region) for m in range(1, M + 1)]
    return counts, series.zeta_series(counts)


def cmd_zeta(cfg, system):
    P = cfg.params
    subset = tuple(range(1, system.r + 1))
    counts, Z = _zeta_for(system, subset, P["terms"])
    out = {"terms": P["terms"], "counts": counts, "series": Z.to_json(), "precision": f"exact to t^{P['terms']}"}
    verdict = "n/a"
    if P["reconstruct"] is not None:
        try:
            R = series.pade_reconstruct(Z, P["reconstruct"])
            out["rational"] = {**R.to_json(), "text": str(R),
                               "certification": "agrees with every known coefficient; degree bound assumed"}
        except series.ReconstructionError as exc:
            out["rational"] = None
            out["reconstruction_error"] = str(exc)
            verdict = "fail"
    return out, verdict


def cmd_expsum(cfg, system):
    P = cfg.params
    rows = []
    ok = True
    for m in range(1, P["terms"] + 1):
        if P["check_identity"]:
            rec = charsums.inclusion_exclusion_check(system, m, strict=False)
            ok &= rec.passed
            rows.append({**rec.to_json(), "precision": EXACT})
        else:
            S = charsums.dwork_exp_sum(system, m)
            rows.append({"m": m, "exp_sum": S.to_json(), "method": "grouped", "precision": EXACT})
    out = {"basis": f"coordinates of zeta^0..zeta^{system.field.p - 2}, zeta a primitive {system.field.p}-th root of unity",
           "dwork_polynomial_variables": system.n + system.r, "sums": rows}
    return out, ("pass" if ok else "fail") if P["check_identity"] else "n/a"


def cmd_bounds(cfg, system):
    P = cfg.params
    try:
        prof, source = bounds.profile_of(system, P["dim"], P["projective"], cfg.seed)
    except bounds.EmptyVarietyError as exc:
        raise InputError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rep = bounds.bound_report(prof, source)
    return {**rep.to_json(), "precision": EXACT}, "pass" if all(rep.invariants().values()) else "fail"


def cmd_axkatz(cfg, system):
    P = cfg.params
    v = bounds.ax_katz_check(system, P["terms"], P["pade"], P["ceiling"])
    return {**v.to_json(), "precision": EXACT}, "pass" if v.passed else "fail"


def cmd_visibility(cfg, system):
    P = cfg.params
    factor = _int_list(P["factor"], "--factor")
    if not factor or factor[0] != 1:
        raise InputError("--factor must be a coefficient list with constant term 1")
    rng = P["range"] if P["range"] is not None else system.n + system.r
    zetas, labels, failures = [], [], []
    for J in _all_subsets(system.r):
        counts, Z = _zeta_for(system, J, P["terms"], "torus")
        try:
            zetas.append(series.pade_reconstruct(Z, P["pade"]))
            labels.append({"subset": list(J), "zeta": zetas[-1].to_json()})
        except series.ReconstructionError as exc:
            failures.append({"subset": list(J), "counts": counts, "error": str(exc)})
    if failures:
        return {"reconstruction_failures": failures,
                "note": "visibility is only decided on rational reconstructions"}, "fail"
    res = series.weak_visibility_check(factor, zetas, system.q, rng)
    for h in res["hits"]:
        h["subset"] = labels[h["zeta"]]["subset"]
    return {"zetas": labels, **res, "precision": EXACT,
            "scope": "zeta functions of the tori Z*_I for all I; shifts F(q^m t)"}, "n/a"


def _dwork_setup(cfg, system):
    if system.field.a != 1:
        raise InputError("the dwork command works over prime fields only")
    if cfg.params["bare"]:
        if system.r != 1:
            raise InputError("--bare expects exactly one polynomial g")
        g = system.polys[0]
        return g, dwork.WeightProgram(g.n, 0, (), (), max(g.degree, 1))
    return dwork.dwork_fixture(system)


def cmd_dwork(cfg, system):
    P = cfg.params
    p = system.field.p
    g, wp = _dwork_setup(cfg, system)
    I = tuple(P["subset"] or ())
    if any(i < 1 or i > g.n for i in I):
        raise InputError(f"subset {list(I)} out of range 1..{g.n}")
    mat = dwork.alpha_matrix(g, p, I, P["degree"], P["precision"])
    R = mat.ring
    traces = dwork.matrix_traces(mat, P["traces"])
    out = {"g_variables": g.n, "subset": list(I), "basis_size": mat.size,
           "ring": f"Z_{p}[pi]/(pi^{p - 1} + {p}) mod {p}^{P['precision']}",
           "traces": [{"m": m, "value": dwork.PadicCyclo.wrap(R, t).to_json(),
                       "certified_pi_precision": mat.floor}
                      for m, t in enumerate(traces, start=1)],
           "truncation_floor_pi": mat.floor, "precision_cap_pi": R.cap}
    ok = True
    if P["verify_trace_formula"]:
        if I:
            raise InputError("--verify-trace-formula uses the full basis; drop --subset")
        recs = [dwork.verify_trace_formula(g, p, m, P["degree"], P["precision"])
                for m in range(1, P["traces"] + 1)]
        out["trace_formula"] = [r.to_json() for r in recs]
        ok &= all(r.passed for r in recs)
    if P["check_slopes"]:
        subsets = [I] if P["subset"] else list(_all_subsets(g.n))
        reports = []
        for J in subsets:
            rep = dwork.check_first_slope(dwork.alpha_matrix(g, p, J, P["degree"], P["precision"]), wp)
            reports.append(rep.to_json())
            ok &= rep.passed
        out["slopes"] = reports
    checked = P["verify_trace_formula"] or P["check_slopes"]
    return out, ("pass" if ok else "fail") if checked else "n/a"


def cmd_recombine(cfg, system):
    try:
        rc = geometry.recombine(system, seed=cfg.seed)
    except geometry.EmptyVariety as exc:
        raise InputError(str(exc)) from exc
    except geometry.RecombinationError as exc:
        return {"error": str(exc), "stage": getattr(exc, "stage", None)}, "fail"
    out = {"g": rc.system.to_json()["polys"], "matrix": rc.matrix, "jumps": rc.jumps,
           "codim": rc.codim, "constant_field_degree": rc.constant_field_degree,
           "checks": rc.checks, "certification": rc.certification,
           "note": "pointwise vanishing over F_{q^s}, s <= 3, stands in for ideal membership"}
    return out, "pass" if all(rc.checks.values()) else "fail"


def cmd_verify(cfg, system):
    name = cfg.params["campaign"]
    names = list(campaigns.CAMPAIGNS) if name == "all" else [name]
    results = [campaigns.CAMPAIGNS[k](cfg.seed).to_json() for k in names]
    return {"campaigns": results, "precision": EXACT}, "pass" if all(r["pass"] for r in results) else "fail"


COMMANDS = {
    "count": cmd_count, "zeta": cmd_zeta, "expsum": cmd_expsum, "bounds": cmd_bounds,
    "axkatz": cmd_axkatz, "visibility": cmd_visibility, "dwork": cmd_dwork,
    "recombine": cmd_recombine, "verify": cmd_verify,
}


# --- argument parsing --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o")
    common.add_argument("--format", dest="fmt", choices=("json", "table"), default="json")
    common.add_argument("--timing", action="store_true", help="add wall-clock time (breaks byte-identity)")

    parser = _Parser(prog="dworkbench", description="Desk-scale checks for zeta functions of varieties "
                                                     "over finite fields.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_system(name, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--system", required=True, help="system JSON file")
        return sp

    sp = with_system("count", "count points of Z_subset over F_{q^m}")
    sp.add_argument("--subset", type=lambda s: _int_list(s, "--subset"))
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--region", choices=("affine", "torus"), default="affine")

    sp = with_system("zeta", "zeta series from counts, optional rational reconstruction")
    sp.add_argument("--terms", type=int, required=True)
    sp.add_argument("--reconstruct", type=int, metavar="B")

    sp = with_system("expsum", "toric exponential sums of the Dwork polynomial")
    sp.add_argument("--terms", type=int, required=True)
    sp.add_argument("--check-identity", action="store_true")

    sp = with_system("bounds", "divisibility exponents mu, nu, eps")
    sp.add_argument("--dim", type=int)
    sp.add_argument("--projective", action="store_true")

    sp = with_system("axkatz", "Ax-Katz divisibility of counts and zeta slopes")
    sp.add_argument("--terms", type=int, required=True)
    sp.add_argument("--pade", type=int, default=1, metavar="B")
    sp.add_argument("--ceiling", type=int)

    sp = with_system("visibility", "shifted occurrences of a factor in torus zeta functions")
    sp.add_argument("--factor", required=True, help='coefficients, constant term first, e.g. "1,-3"')
    sp.add_argument("--range", type=int)
    sp.add_argument("--terms", type=int, default=8)
    sp.add_argument("--pade", type=int, default=1, metavar="B")

    sp = with_system("dwork", "Dwork matrix traces, trace formula and slope checks")
    sp.add_argument("--precision", type=int, default=8, metavar="M")
    sp.add_argument("--degree", type=int, default=8, metavar="D")
    sp.add_argument("--traces", type=int, default=1, metavar="m_max")
    sp.add_argument("--subset", type=lambda s: _int_list(s, "--subset"))
    sp.add_argument("--bare", action="store_true", help="use the single polynomial as g itself")
    sp.add_argument("--verify-trace-formula", action="store_true")
    sp.add_argument("--check-slopes", action="store_true")

    with_system("recombine", "recombine equations so a prefix cuts out Z in the right codimension")

    sp = sub.add_parser("verify", parents=[common], help="run a verification campaign")
    sp.add_argument("--campaign", required=True, choices=list(campaigns.CAMPAIGNS) + ["all"])
    return parser


def parse(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(argv)
    skip = {"command", "system", "seed", "output", "fmt", "timing"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.command, getattr(args, "system", None), args.seed, params,
                     args.output, args.fmt, args.timing)


def run(cfg: RunConfig) -> tuple[dict, int]:
    report = {"schema": SCHEMA, "tool": f"dworkbench {__version__}", "config": cfg.echo(),
              "input_digest": None}
    start = time.perf_counter()
    try:
        system = None
        if cfg.system is not None:
            system, report["input_digest"] = load_system(cfg.system)
        results, verdict = COMMANDS[cfg.command](cfg, system)
        report["results"] = results
        report["verdict"] = verdict
        code = 1 if verdict == "fail" else 0
    except InputError as exc:
        report["error"] = {"kind": "input", "message": str(exc)}
        report["verdict"] = "error"
        code = 2
    except CapExceeded as exc:
        report["error"] = {"kind": "input", "message": f"enumeration cap exceeded: {exc}"}
        report["verdict"] = "error"
        code = 2
    except geometry.DimensionInconclusive as exc:
        report["error"] = {"kind": "inconclusive", "message": str(exc), "evidence": exc.evidence}
        report["verdict"] = "fail"
        code = 1
    if cfg.timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 3)
    return report, code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse(argv)
    except InputError as exc:
        print(f"dworkbench: error: {exc}", file=sys.stderr)
        return 2
    report, code = run(cfg)
    if cfg.fmt == "table":
        text = render_table(report)
    else:
        text = json.dumps(report, default=_default, sort_keys=True, indent=2) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == 2:
        print(f"dworkbench: error: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
