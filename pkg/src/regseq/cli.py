"""Command-line front end: ``regseq <command> [options]``.

Exit codes: 0 success, 2 usage or input-format errors, 3 domain and
accuracy errors, 4 resource limits.  Complex numbers are written as
``[re, im]`` in JSON and as ``re+imi`` in CSV cells.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import esthetic as est
from .errors import InvalidArgumentError, RegseqError, RepresentationFormatError
from .linrep import (binary_sum_of_digits, constant_sequence, evaluate, load,
                     summatory_brute, summatory_fast)
from .spectral import EPS_R, eigen_data, jsr_bounds, sum_matrix

BUILTINS = {
    "constant": lambda q: constant_sequence(q or 2),
    "sum-of-digits": lambda q: binary_sum_of_digits(),
    "esthetic": lambda q: est.build_representation(q or 4),
}


# --- formatting ---------------------------------------------------------------

def cx_json(z):
    z = complex(z)
    return [z.real, z.imag]


def cx_csv(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


def parse_complex(text: str) -> complex:
    """Accept "re,im", "re+imi" / "re-imi", or a plain real number."""
    t = text.strip().replace(" ", "")
    try:
        if "," in t:
            re, im = t.split(",")
            return complex(float(re), float(im))
        if t.endswith("i"):
            return complex(t[:-1] + "j")
        return complex(float(t))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


class Table:
    def __init__(self, header, rows):
        self.header = header
        self.rows = rows


def _meta():
    return {"generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "version": __version__}


def render(result, fmt: str, meta: bool) -> str:
    if isinstance(result, Table):
        if fmt == "json":
            obj = {"columns": result.header,
                   "rows": [[cx_json(v) if isinstance(v, complex) else v for v in row] for row in result.rows]}
            if meta:
                obj["meta"] = _meta()
            return json.dumps(obj, indent=1) + "\n"
        buf = io.StringIO()
        if meta:
            buf.write(f"# generated {_meta()['generated']} by regseq {__version__}\n")
        w = csv.writer(buf, lineterminator="\n", delimiter="," if fmt == "csv" else " ")
        w.writerow(result.header)
        for row in result.rows:
            w.writerow([cx_csv(v) if isinstance(v, complex) else (repr(v) if isinstance(v, float) else v)
                        for v in row])
        return buf.getvalue()
    if fmt == "text":
        return "".join(f"{k}: {json.dumps(v)}\n" for k, v in result.items())
    obj = dict(result)
    if meta:
        obj["meta"] = _meta()
    return json.dumps(obj, indent=1) + "\n"


# --- inputs -------------------------------------------------------------------

def load_rep(spec: str):
    """A JSON file, or ``builtin:<name>[:q]`` for constant, sum-of-digits, esthetic."""
    if spec.startswith("builtin:"):
        parts = spec.split(":")
        name = parts[1]
        if name not in BUILTINS:
            raise RepresentationFormatError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
        try:
            q = int(parts[2]) if len(parts) > 2 else None
        except ValueError:
            raise RepresentationFormatError(f"bad base in {spec!r}") from None
        return BUILTINS[name](q)
    return load(spec)


def _evaluator(rep, args, eigenvalues=None):
    from .dirichlet import DirichletEvaluator
    return DirichletEvaluator(rep, R=args.R, delta=args.delta, tolerance=args.tolerance,
                              eps_R=args.eps_R, eigenvalues=eigenvalues)


def _u_grid(args):
    n = int(round((args.u_max - args.u_min) / args.u_step)) + 1
    if n < 1:
        raise InvalidArgumentError("empty u grid")
    return np.round(args.u_min + args.u_step * np.arange(n), 12)


# --- commands -----------------------------------------------------------------

def cmd_eval(args):
    rep = load_rep(args.rep)
    rows = []
    for n in args.n:
        v = evaluate(rep, n)
        rows.append([n, v if isinstance(v, int) else complex(v)])
    return Table(["n", "x"], rows)


def cmd_sum(args):
    rep = load_rep(args.rep)
    val = summatory_brute(rep, args.N) if args.brute else summatory_fast(rep, args.N)
    if isinstance(val, int):
        return {"N": args.N, "X": val}
    return {"N": args.N, "X": cx_json(val)}


def cmd_spectrum(args):
    rep = load_rep(args.rep)
    sp = eigen_data(sum_matrix(rep), cluster_tol=args.cluster_tol, rank_tol=args.rank_tol)
    return {"eigenvalues": [{"value": cx_json(e.value), "algMult": e.alg_mult, "m": e.max_jordan}
                            for e in sp.eigenvalues],
            "clusterTol": sp.cluster_tol, "warnings": sp.warnings}


def cmd_jsr(args):
    rep = load_rep(args.rep)
    b = jsr_bounds(rep.matrices, args.max_len, args.norm)
    return {"upper": b.upper, "lower": b.lower, "lengthTested": b.length_tested,
            "norm": b.norm, "R": b.R(args.eps_R)}


def cmd_dirichlet(args):
    rep = load_rep(args.rep)
    ev = _evaluator(rep, args)
    rows = []
    for s in args.s:
        if args.method == "direct":
            V, bound = ev.direct(s, return_bound=True)
        else:
            V, bound = ev.continued(s), None
        rows.append({"s": cx_json(s), "V": [cx_json(z) for z in V],
                     "X": cx_json(V @ ev.left), "tailBound": bound})
    return {"method": args.method, "R": ev.R, "values": rows}


def _expansion(rep, args, executor):
    from .fourier import build_expansion
    ev = _evaluator(rep, args)
    sp = eigen_data(ev.C)
    return ev, build_expansion(ev, sp, args.L, rho=args.rho, executor=executor)


def cmd_fourier(args, executor):
    rep = load_rep(args.rep)
    _, exp = _expansion(rep, args, executor)
    rows = []
    for t in exp.terms:
        lam = complex(t.lam)
        for ell, c in zip(t.indices.tolist(), t.coeffs):
            rows.append([lam.real, lam.imag, t.k, ell, float(c.real), float(c.imag)])
    return Table(["lambda_re", "lambda_im", "k", "ell", "phi_re", "phi_im"], rows)


def cmd_fluctuation(args, executor):
    from .fourier import empirical_fluctuation
    rep = load_rep(args.rep)
    _, exp = _expansion(rep, args, executor)
    if not exp.terms:
        raise InvalidArgumentError("the expansion has no main terms")
    if not 0 <= args.term < len(exp.terms):
        raise InvalidArgumentError(f"--term must be in [0, {len(exp.terms) - 1}]")
    u = _u_grid(args)
    emp, rec = empirical_fluctuation(rep, exp, args.term, u)
    return Table(["u", "empirical", "reconstructed"],
                 [[float(a), complex(b), complex(c)] for a, b, c in zip(u, emp, rec)])


def cmd_combine(args, executor):
    from .symmetry import RootsOfUnityBundle, combine
    rep = load_rep(args.rep)
    ev = _evaluator(rep, args)
    bundle = RootsOfUnityBundle(args.lam, args.p, args.k, [])
    series = combine(bundle, ev, indices=np.arange(-args.L, args.L + 1), rho=args.rho, executor=executor)
    return Table(["ell", "phi"], [[ell, complex(c)] for ell, c in zip(series.indices.tolist(), series.coeffs)])


def cmd_tauber(args):
    from .tauber import PeriodicFunctionFamily, build_psi_from_fourier, verify_tauber_relation
    try:
        with open(args.phi) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise RepresentationFormatError(f"cannot read {args.phi}: {exc}") from exc
    if isinstance(data, list):
        data = {"phi": data}
    if not isinstance(data, dict) or "phi" not in data:
        raise RepresentationFormatError("phi file must hold a list of coefficient maps or {\"phi\": [...]}")
    if args.m is not None and args.m != len(data["phi"]):
        raise InvalidArgumentError(f"--m {args.m} but the file defines {len(data['phi'])} functions")
    fam = PeriodicFunctionFamily.from_maps(data["phi"], args.kappa, args.q, args.alpha, args.beta)
    psi = build_psi_from_fourier(fam)
    rep = verify_tauber_relation(fam, args.Nmax, args.samples, psi=psi)
    return {"fittedC": cx_json(rep.fitted_c), "maxResidual": rep.max_residual,
            "decayExponent": rep.decay_exponent, "flagQKappaUnit": psi.flag_q_kappa_unit,
            "psi": {str(j): {str(l): cx_json(psi.coefficient(j, l)) for l in fam.indices.tolist()}
                    for j in range(-1, fam.m)}}


def cmd_esthetic(args, executor):
    from .fourier import empirical_fluctuation
    an = est.asymptotic_analysis(args.q, args.L, tolerance=args.tolerance, executor=executor)
    out = {"q": args.q, "errorLogPower": an.error_log_power, "onePeriodic": an.one_periodic,
           "onePeriodicVerified": an.one_periodic_verified, "logGrowth": an.log_growth,
           "terms": [{"lambda": cx_json(t.lam), "k": t.k, "period": t.period,
                      "exponent": math.log(abs(t.lam)) / math.log(args.q) if t.lam != 0 else None,
                      "L": t.L, "phi0": cx_json(t.coefficient(0))}
                     for t in an.expansion.terms]}
    if args.emit_fluctuation:
        if not an.expansion.terms:
            raise InvalidArgumentError("no main term to sample for q = 2")
        u = _u_grid(args)
        emp, rec = empirical_fluctuation(est.build_representation(args.q), an.expansion, 0, u)
        table = Table(["u", "empirical", "reconstructed"],
                      [[float(a), complex(b), complex(c)] for a, b, c in zip(u, emp, rec)])
        with open(args.emit_fluctuation, "w") as fh:
            fh.write(render(table, "csv", not args.no_meta))
        out["fluctuationFile"] = args.emit_fluctuation
    return out


# --- parser -----------------------------------------------------------------

def _add_common(p, fmt_choices, default_fmt):
    p.add_argument("--format", choices=fmt_choices, default=default_fmt,
                   help=f"output format (default {default_fmt})")
    p.add_argument("--output", "-o", help="write the result to this file instead of stdout")
    # global switches are accepted after the command too
    p.add_argument("--no-meta", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    p.add_argument("--error-json", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)


def _add_rep(p):
    p.add_argument("--rep", required=True,
                   help="representation JSON file (see docs/schema.json) or builtin:<name>[:q]")


def _add_analysis(p, L_default=50):
    p.add_argument("--R", type=positive_float, default=None,
                   help="growth bound R (default: JSR upper bound + eps-R)")
    p.add_argument("--eps-R", dest="eps_R", type=positive_float, default=EPS_R,
                   help=f"margin added to the JSR upper bound (default {EPS_R})")
    p.add_argument("--delta", type=positive_float, default=0.25,
                   help="margin to the line Re s = log_q R (default 0.25)")
    p.add_argument("--tolerance", type=positive_float, default=1e-9,
                   help="absolute accuracy target (default 1e-9)")
    p.add_argument("--rho", type=positive_float, default=None,
                   help="contour radius for residues (default: automatic)")
    p.add_argument("--L", type=nonneg_int, default=L_default,
                   help=f"Fourier truncation |l| <= L (default {L_default})")


def _add_grid(p, lo, hi, step):
    p.add_argument("--u-min", dest="u_min", type=float, default=lo, help=f"first u (default {lo})")
    p.add_argument("--u-max", dest="u_max", type=float, default=hi, help=f"last u (default {hi})")
    p.add_argument("--u-step", dest="u_step", type=positive_float, default=step,
                   help=f"grid step (default {step})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regseq", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"regseq {__version__}")
    ap.add_argument("--no-meta", action="store_true", help="omit the timestamp line/field")
    ap.add_argument("--error-json", action="store_true",
                    help="on failure print a JSON error object to stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="x(n) for given n")
    _add_rep(p)
    p.add_argument("--n", type=nonneg_int, nargs="+", required=True)
    _add_common(p, ["csv", "json", "text"], "csv")

    p = sub.add_parser("sum", help="exact summatory function X(N)")
    _add_rep(p)
    p.add_argument("--N", type=nonneg_int, required=True)
    p.add_argument("--brute", action="store_true", help="direct summation (N <= 10^7)")
    _add_common(p, ["json", "text"], "text")

    p = sub.add_parser("spectrum", help="eigenvalues of C with multiplicities")
    _add_rep(p)
    p.add_argument("--cluster-tol", dest="cluster_tol", type=positive_float, default=None,
                   help="eigenvalue clustering tolerance (default 1e-8 (1 + ||C||))")
    p.add_argument("--rank-tol", dest="rank_tol", type=positive_float, default=1e-8,
                   help="relative singular-value cut for ranks (default 1e-8)")
    _add_common(p, ["json", "text"], "json")

    p = sub.add_parser("jsr", help="joint spectral radius bounds")
    _add_rep(p)
    p.add_argument("--max-len", dest="max_len", type=positive_int, default=8,
                   help="longest product enumerated (default 8)")
    p.add_argument("--norm", choices=["row-sum", "col-sum", "spectral"], default="row-sum")
    p.add_argument("--eps-R", dest="eps_R", type=positive_float, default=EPS_R)
    _add_common(p, ["json", "text"], "json")

    p = sub.add_parser("dirichlet", help="values of the Dirichlet series V(s)")
    _add_rep(p)
    p.add_argument("--s", type=parse_complex, nargs="+", required=True, help="points as re,im")
    p.add_argument("--method", choices=["continued", "direct"], default="continued")
    _add_analysis(p)
    _add_common(p, ["json", "text"], "json")

    p = sub.add_parser("fourier", help="Fourier coefficients of all main-term fluctuations")
    _add_rep(p)
    _add_analysis(p)
    _add_common(p, ["csv", "json", "text"], "csv")

    p = sub.add_parser("fluctuation", help="empirical vs reconstructed fluctuation on a u grid")
    _add_rep(p)
    _add_analysis(p)
    p.add_argument("--term", type=nonneg_int, default=0, help="index of the sampled main term")
    _add_grid(p, 8.0, 12.0, 0.01)
    _add_common(p, ["csv", "json", "text"], "csv")

    p = sub.add_parser("combine", help="p-periodic coefficients of a roots-of-unity bundle")
    _add_rep(p)
    _add_analysis(p)
    p.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    p.add_argument("--p", type=positive_int, required=True)
    p.add_argument("--k", type=nonneg_int, default=0)
    _add_common(p, ["csv", "json", "text"], "csv")

    p = sub.add_parser("tauber", help="check the pseudo-Tauberian relation")
    p.add_argument("--phi", required=True, help="JSON list of coefficient maps {l: phi_l}, one per j")
    p.add_argument("--kappa", type=parse_complex, default=0j)
    p.add_argument("--q", type=positive_float, default=2.0)
    p.add_argument("--m", type=positive_int, default=None, help="number of functions (checked)")
    p.add_argument("--alpha", type=positive_float, default=1.0)
    p.add_argument("--beta", type=positive_float, default=0.5)
    p.add_argument("--Nmax", type=positive_int, default=10**6)
    p.add_argument("--samples", type=positive_int, default=40)
    _add_common(p, ["json", "text"], "json")

    p = sub.add_parser("esthetic", help="asymptotics of q-esthetic numbers")
    p.add_argument("--q", type=positive_int, required=True)
    p.add_argument("--L", type=nonneg_int, default=50)
    p.add_argument("--tolerance", type=positive_float, default=1e-9)
    p.add_argument("--emit-fluctuation", dest="emit_fluctuation",
                   help="write u,empirical,reconstructed CSV here")
    _add_grid(p, 8.0, 12.0, 0.01)
    _add_common(p, ["json", "text"], "json")
    return ap


PARALLEL = {"fourier": cmd_fourier, "fluctuation": cmd_fluctuation, "combine": cmd_combine,
            "esthetic": cmd_esthetic}
SERIAL = {"eval": cmd_eval, "sum": cmd_sum, "spectrum": cmd_spectrum, "jsr": cmd_jsr,
          "dirichlet": cmd_dirichlet, "tauber": cmd_tauber}


def run(args) -> int:
    from .fourier import make_executor
    try:
        if args.command in PARALLEL:
            executor = make_executor()
            try:
                result = PARALLEL[args.command](args, executor)
            finally:
                if executor is not None:
                    executor.shutdown()
        else:
            result = SERIAL[args.command](args)
        text = render(result, args.format, not args.no_meta)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except RegseqError as exc:
        return _fail(args, type(exc).__name__, str(exc), exc.exit_code)
    except OSError as exc:
        return _fail(args, "FileError", str(exc), 2)


def _fail(args, kind, message, code) -> int:
    if args.error_json:
        sys.stdout.write(json.dumps({"error": kind, "message": message, "exitCode": code}) + "\n")
    print(f"regseq: {kind}: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
