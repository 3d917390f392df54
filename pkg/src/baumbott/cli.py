"""Command-line front end.

    baumbott COMMAND [JOB.json | -] [--eps ...] [--format json|csv]

Jobs are JSON objects; exact values are emitted as strings ("16/3") next to
floating approximations.  Exit codes: 0 ok, 2 domain error, 3 parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .charclass import ScalarMatrix, parse_phi, phi_eval
from .errors import BaumBottError, JobError, ParseError
from .foliation import (
    FoliationP2,
    VectorField,
    bb_residue,
    global_sum_check,
    milnor_at,
    translate_to_origin,
)
from .localalg import buchberger_with_cofactors, grothendieck_residue, quotient_basis
from .polycore import GaussianRational, MonomialOrder, parse_polynomial, parse_scalar
from .regnum import (
    ChiProfile,
    ConvergenceRow,
    ShellQuadrature,
    bb_numeric,
    convergence_csv,
    convergence_study,
)

log = logging.getLogger("baumbott")

SCHEMA_VERSION = 1
COMMANDS = ("residue", "milnor", "bb", "sum-check-p2", "numeric", "phi-eval")
EXIT_OK, EXIT_DOMAIN, EXIT_PARSE = 0, 2, 3

_COMMON = {"command", "n"}
_KEYS = {
    "residue": {"field", "polynomial", "order"},
    "milnor": {"field", "point", "order"},
    "bb": {"field", "phi", "point", "points", "order", "localize"},
    "sum-check-p2": {"degree", "field", "phi", "points"},
    "numeric": {"field", "phi", "eps", "eps_schedule", "grid", "radius", "chi", "mode",
                "threads", "error_estimate"},
    "phi-eval": {"phi", "matrix"},
}
_REQUIRED = {
    "residue": {"field", "polynomial"},
    "milnor": {"field"},
    "bb": {"field", "phi"},
    "sum-check-p2": {"degree", "field", "phi", "points"},
    "numeric": {"field", "phi"},
    "phi-eval": {"phi", "matrix"},
}


@dataclass
class JobSpec:
    command: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data, command=None):
        if not isinstance(data, dict):
            raise JobError("job must be a JSON object")
        data = dict(data)
        given = data.pop("command", None)
        if command is None:
            command = given
        elif given is not None and given != command:
            raise JobError(f"job says command {given!r} but {command!r} was requested")
        if command not in COMMANDS:
            raise JobError(f"unknown command {command!r}; expected one of {COMMANDS}")
        allowed = _KEYS[command] | _COMMON
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise JobError(f"unknown keys for {command!r}: {unknown}")
        missing = sorted(_REQUIRED[command] - set(data))
        if missing:
            raise JobError(f"missing keys for {command!r}: {missing}")
        if "field" in data and not (isinstance(data["field"], list)
                                    and all(isinstance(s, str) for s in data["field"])):
            raise JobError("'field' must be a list of polynomial strings")
        if "n" in data and "field" in data and command != "sum-check-p2" \
                and data["n"] != len(data["field"]):
            raise JobError(f"n = {data['n']} but the field has {len(data['field'])} components")
        return cls(command, data)

    def to_dict(self):
        return {"command": self.command, **self.params}


def _exact(x):
    return str(GaussianRational.coerce(x))


def _approx(x):
    z = complex(x)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _field(p):
    return VectorField.parse(p["field"])


def _points(p, n):
    if "points" in p:
        pts = p["points"]
    elif "point" in p:
        pts = [p["point"]]
    else:
        pts = [[0] * n]
    return [[_scalar(c) for c in pt] for pt in pts]


def _scalar(c):
    if isinstance(c, bool) or not isinstance(c, (int, str)):
        raise JobError(f"coordinates must be integers or exact strings like '3/2', got {c!r}")
    return GaussianRational(c) if isinstance(c, int) else parse_scalar(c)


def _run_residue(p, diag):
    gens = [parse_polynomial(s, nvars=len(p["field"])) for s in p["field"]]
    h = parse_polynomial(p["polynomial"], nvars=len(gens))
    order = MonomialOrder.parse(p.get("order", "grevlex"))
    gb = buchberger_with_cofactors(gens, order)
    q = quotient_basis(gb)
    diag.update(quotient_dimension=q.dimension, groebner_size=len(gb.elements))
    r = grothendieck_residue(h, gens, gb=gb)
    return {"value": _exact(r), "approx": _approx(r)}


def _run_milnor(p, diag):
    X = _field(p)
    pt = _points(p, X.n)[0]
    Y = translate_to_origin(X, pt)
    gb = buchberger_with_cofactors(Y.components, MonomialOrder.parse(p.get("order", "grevlex")))
    diag["groebner_size"] = len(gb.elements)
    # milnor_at also checks the value against the c_n residue
    mu = milnor_at(Y)
    diag["quotient_dimension"] = mu
    return {"value": str(mu), "approx": float(mu)}


def _run_bb(p, diag):
    X = _field(p)
    phi = parse_phi(p["phi"], X.n)
    rows = []
    for pt in _points(p, X.n):
        r = bb_residue(X, pt, phi, localize=bool(p.get("localize", False)))
        rows.append({"point": [_exact(c) for c in pt], "value": _exact(r), "approx": _approx(r)})
    out = {"residues": rows}
    if len(rows) == 1:
        out["value"] = rows[0]["value"]
        out["approx"] = rows[0]["approx"]
    return out


def _run_sum_check(p, diag):
    if len(p["field"]) != 2:
        raise JobError("sum-check-p2 needs field = [P, Q] in x, y")
    names = ["x", "y"] if any("x" in s or "y" in s for s in p["field"]) else ["z1", "z2"]
    P, Q = (parse_polynomial(s, names=names) for s in p["field"])
    F = FoliationP2(int(p["degree"]), P, Q)
    phi = parse_phi(p["phi"], 2)
    pts = p["points"]
    if not isinstance(pts, dict):
        raise JobError("'points' must map chart index to a list of points")
    points = {int(k): [[_scalar(c) for c in pt] for pt in v] for k, v in pts.items()}
    if set(points) - {0, 1, 2}:
        raise JobError("chart indices must be 0, 1 or 2")
    report = global_sum_check(F, points, phi)
    return report.to_dict()


def _run_numeric(p, diag):
    X = _field(p)
    phi = parse_phi(p["phi"], X.n)
    chi = ChiProfile(kind=p.get("chi", "quintic"))
    q = ShellQuadrature(radius=float(p.get("radius", 1.0)), grid=p.get("grid"),
                        mode=p.get("mode", "shell-only"), threads=int(p.get("threads", 1)),
                        estimate_error=bool(p.get("error_estimate", False)))
    exact = bb_residue(X, None, phi)
    out = {"exact": _exact(exact), "exact_approx": _approx(exact)}
    if "eps_schedule" in p:
        rows = convergence_study(X, phi, [float(e) for e in p["eps_schedule"]], q, chi,
                                 exact=complex(exact))
        out["table"] = [{"eps": r.eps, "value_re": r.value.real, "value_im": r.value.imag,
                         "abs_error": r.abs_error} for r in rows]
        diag["quadrature_nodes"] = q.resolution(X.n) ** (2 * X.n) * len(rows)
        return out
    res = bb_numeric(X, phi, float(p.get("eps", 1e-2)), q, chi)
    out.update(value_re=res.value.real, value_im=res.value.imag,
               abs_error=abs(res.value - complex(exact)),
               eps=res.eps, grid=res.grid, box=res.box)
    if res.error_estimate is not None:
        out["error_estimate"] = res.error_estimate
    diag.update(quadrature_nodes=res.nodes, evaluated_nodes=res.evaluated,
                grid_shifted=res.shifted)
    return out


def _run_phi_eval(p, diag):
    m = p["matrix"]
    if not isinstance(m, list) or not m:
        raise JobError("'matrix' must be a nonempty list of rows")
    A = ScalarMatrix([[_scalar(x) for x in row] for row in m])
    phi = parse_phi(p["phi"], p.get("n", A.size))
    v = phi_eval(phi, A)
    return {"value": _exact(v), "approx": _approx(v)}


_DISPATCH = {
    "residue": _run_residue,
    "milnor": _run_milnor,
    "bb": _run_bb,
    "sum-check-p2": _run_sum_check,
    "numeric": _run_numeric,
    "phi-eval": _run_phi_eval,
}


def run(job):
    """Execute a job; domain errors become a structured ``error`` entry."""
    if not isinstance(job, JobSpec):
        job = JobSpec.from_dict(job)
    diag = {}
    report = {"schema_version": SCHEMA_VERSION, "version": __version__,
              "job": job.to_dict(), "result": None, "diagnostics": diag, "error": None}
    t0 = time.perf_counter()
    try:
        report["result"] = _DISPATCH[job.command](job.params, diag)
    except BaumBottError as exc:
        report["error"] = exc.to_dict()
    except (ValueError, TypeError, KeyError) as exc:
        report["error"] = {"code": "ParseError", "message": str(exc)}
    diag["wall_time_s"] = round(time.perf_counter() - t0, 6)
    return report


def emit(report, fmt="json"):
    """Serialise a report; CSV is only available for convergence tables."""
    if fmt == "json":
        return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("utf-8")
    if fmt == "csv":
        result = report.get("result") or {}
        table = result.get("table")
        if table is None:
            raise ValueError("csv output is only available for convergence tables")
        rows = [ConvergenceRow(r["eps"], complex(r["value_re"], r["value_im"]), r["abs_error"])
                for r in table]
        return convergence_csv(rows).encode("utf-8")
    raise ValueError(f"unsupported format {fmt!r}")


def exit_code(report):
    err = report.get("error")
    if err is None:
        return EXIT_OK
    return EXIT_PARSE if err.get("code") == "ParseError" else EXIT_DOMAIN


def build_parser():
    ap = argparse.ArgumentParser(prog="baumbott", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("job", nargs="?", default="-", help="JSON job file, or - for stdin")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--grid", type=int)
    ap.add_argument("--radius", type=float)
    ap.add_argument("--chi", choices=("cubic", "quintic"))
    ap.add_argument("--order", choices=("grevlex", "lex"))
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--threads", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


_FLAG_KEYS = ("eps", "grid", "radius", "chi", "order", "threads")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        text = sys.stdin.read() if args.job == "-" else open(args.job, encoding="utf-8").read()
        data = json.loads(text)
        if isinstance(data, dict):
            for k in _FLAG_KEYS:
                v = getattr(args, k)
                if v is not None:
                    data[k] = v
        job = JobSpec.from_dict(data, args.command)
    except (OSError, json.JSONDecodeError, JobError, ParseError) as exc:
        err = exc.to_dict() if isinstance(exc, BaumBottError) else \
            {"code": "ParseError", "message": str(exc)}
        report = {"schema_version": SCHEMA_VERSION, "version": __version__, "job": None,
                  "result": None, "diagnostics": {}, "error": err}
        sys.stdout.buffer.write(emit(report))
        return EXIT_PARSE
    log.info("running %s", job.command)
    report = run(job)
    if report["error"]:
        log.error("%s: %s", report["error"]["code"], report["error"]["message"])
    try:
        out = emit(report, args.format)
    except ValueError as exc:
        log.error("%s", exc)
        sys.stdout.buffer.write(emit(report))
        return EXIT_PARSE
    sys.stdout.buffer.write(out)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
