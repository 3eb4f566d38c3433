"""Command-line front end: ``blasius-certify {certify, match, compare, report}``.

Exit codes: 0 all certified, 2 certification failure, 3 oracle contradicts a
certified bound.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction

from . import matching as mt
from . import report
from .inner import SubintervalPartition
from .quasi import check_alpha

log = logging.getLogger("blasius_cert")

METHODS = {"taylor": "taylor_cells", "chebyshev": "chebyshev_l1"}


def _alpha(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"alpha must be an exact rational such as 3/50, got {text!r}") from exc
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError("alpha must be given as an integer ratio, not a decimal")
    try:
        return check_alpha(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _breakpoints(path: str | None):
    if path is None:
        return None
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["breakpoints"]
    bps = [Fraction(str(v)) for v in data]
    SubintervalPartition(bps)  # validate early
    return bps


def _emit(rep: report.CertReport, out: str | None) -> int:
    if out:
        rep.write(out)
        log.info("report written to %s", out)
    doc = rep.to_json()
    print(report.summarize(doc))
    code = rep.exit_code()
    for e in rep.failures:
        print(f"FAIL {e.name}", file=sys.stderr)
    for e in rep.soundness_alarms:
        print(f"ALARM {e.name}", file=sys.stderr)
    return code


def cmd_certify(args) -> int:
    rep = report.certify(args.alpha, METHODS[args.method], _breakpoints(args.cells),
                         continuity=args.continuity, validate=not args.no_validate, tol=args.tol)
    return _emit(rep, args.out)


def cmd_match(args) -> int:
    path = "base" if args.alpha == 0 else "family"
    if args.continuity:
        fp = mt.fixed_point(args.alpha, path, tol=1e-14)
        state, ok = fp.state, fp.converged
        print(f"iterations {len(fp.steps)}  converged {ok}")
    else:
        state = mt.apply_N(mt.MatchState.initial(args.alpha, path))
        ok = True
    a, b, c = state.abc_float
    ws, wo = state.wall_stress()
    print(f"a = {a:.15g}")
    print(f"b = {b:.15g}")
    print(f"c = {c:.15g}")
    print(f"wall stress (scaled)   {ws.mid:.10f}")
    print(f"wall stress (original) {wo.mid:.10f}")
    con = mt.verify_contraction(mt.MatchState.initial(args.alpha, path))
    print(f"residual |A0 - N[A0]| <= {con.residual.hi:.6g}  jacobian <= {con.jacobian.hi:.4f}  "
          f"certified {con.certified} (jacobian non-rigorous)")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"alpha": str(args.alpha), "a": a, "b": b, "c": c,
                       "wall_stress": [ws.mid, wo.mid], "converged": ok,
                       "contraction": con.certified}, fh, indent=2)
    return 0 if ok and con.certified else 2


def cmd_compare(args) -> int:
    rep, cert, far_k, dev = report.compare_run(args.alpha, args.tol)
    out = args.out or f"compare_alpha_{str(args.alpha).replace('/', '_')}.csv"
    with open(out, "w", newline="") as fh:
        csv.writer(fh).writerows(report.deviation_rows(dev, cert, far_k))
    print(f"max inner |F-F0|, |F'-F0'|, |F''-F0''| = " + ", ".join(f"{v:.3e}" for v in dev.inner_max)
          + "  (non-rigorous)")
    if cert is not None:
        print(f"certified inner bounds               = {cert.E_sup:.3e}, {cert.Ep_sup:.3e}, {cert.Epp_sup:.3e}")
    print("max far-field normalized deviations  = " + ", ".join(f"{v:.3e}" for v in report.far_normalized_max(dev, far_k))
          + "  (resolvable samples)")
    print("far-field x-domain constants         = " + ", ".join(f"{v:.3e}" for v in far_k.as_tuple()))
    for e in rep.sections["validation"]:
        if e.name.startswith("containment"):
            print(f"{e.name}: {json.dumps(e.computed)}  {'ok' if e.within_reference else 'VIOLATION'}")
    print(f"samples written to {out}")
    if rep.soundness_alarms:
        return 3
    return 2 if rep.failures else 0


def cmd_report(args) -> int:
    if args.infile:
        with open(args.infile) as fh:
            doc = json.load(fh)
        print(report.summarize(doc))
        return 0
    codes = []
    for name, rep in (("base", report.certify(0, continuity=True, tol=args.tol)),
                      ("family", report.family_uniform())):
        if args.out:
            rep.write(f"{args.out}.{name}.json")
        print(report.summarize(rep.to_json()))
        print()
        codes.append(rep.exit_code())
    return max(codes)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blasius-certify", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, alpha=True):
        if alpha:
            sp.add_argument("--alpha", type=_alpha, default=Fraction(0), help="exact rational, e.g. 3/50")
        sp.add_argument("--out", help="output file")
        sp.add_argument("--tol", type=float, default=1e-14, help="oracle integrator tolerance")

    c = sub.add_parser("certify", help="run the certification pipeline at one alpha")
    common(c)
    c.add_argument("--method", choices=sorted(METHODS), default="taylor")
    c.add_argument("--cells", help="JSON list of breakpoints of [0, 5/2]")
    c.add_argument("--continuity", action="store_true", help="also iterate the matching map to 1e-14")
    c.add_argument("--no-validate", action="store_true", help="skip the oracle comparison")
    c.set_defaults(func=cmd_certify)

    m = sub.add_parser("match", help="matching triple and wall stress")
    common(m)
    m.add_argument("--continuity", action="store_true", help="iterate the map to a step below 1e-14")
    m.set_defaults(func=cmd_match)

    k = sub.add_parser("compare", help="oracle deviations against certified bounds")
    common(k)
    k.set_defaults(func=cmd_compare)

    r = sub.add_parser("report", help="base and uniform family reports, or summarize a saved report")
    common(r, alpha=False)
    r.add_argument("--in", dest="infile", help="saved JSON report to summarize")
    r.set_defaults(func=cmd_report)
    return p


def _join_negative_alpha(argv: list[str]) -> list[str]:
    """``--alpha -3/50`` would read as an option; rewrite it as ``--alpha=-3/50``."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--alpha" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--alpha={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_alpha(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
