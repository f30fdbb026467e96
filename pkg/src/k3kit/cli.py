"""Command line interface: ``k3kit <command> ...`` (also ``python -m k3kit``)."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import heegner, lift, siegel
from .lattice import LatticeError, classify_table, invariants, parse_lattice
from .qseries import eta_power
from .vvmf import build_f_lambda, build_F_lambda, check_modularity

MODULARITY_SAMPLES = (0.1 + 1.0j, -0.3 + 0.7j, 0.25 + 1.3j)
MODULARITY_LATTICES = (
    "U*2+A1*7",
    "U+U(2)+E8(2)",
    "U*2+E8+A1*4",
    "U*2+E8*2",
    "U*2+E8*2+A1",
)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if hasattr(x, "to_json"):
        return x.to_json()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _emit(obj, as_json, text=None):
    if as_json:
        print(json.dumps(obj, default=_jsonable, indent=2))
    else:
        print(text if text is not None else json.dumps(obj, default=_jsonable, indent=2))


# --- verification reports ---------------------------------------------------------


@dataclass
class Case:
    name: str
    status: str
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self):
        return {"name": self.name, "status": self.status, "seconds": round(self.seconds, 4), **self.detail}


@dataclass
class VerificationReport:
    suite: str
    cases: list = field(default_factory=list)

    @property
    def failed(self):
        return [c for c in self.cases if c.status == "fail"]

    @property
    def exit_code(self):
        return 1 if self.failed else 0

    def extend(self, other):
        self.cases.extend(other.cases)

    def to_json(self):
        counts = {}
        for c in self.cases:
            counts[c.status] = counts.get(c.status, 0) + 1
        return {"suite": self.suite, "counts": counts, "cases": [c.to_json() for c in self.cases]}

    def text(self):
        lines = [f"{c.status.upper():12s} {c.name}" for c in self.cases]
        lines.append(f"{len(self.cases) - len(self.failed)}/{len(self.cases)} cases without failure")
        return "\n".join(lines)


def _timed(name, fn):
    t = time.perf_counter()
    try:
        ok, detail = fn()
        status = "inconclusive" if ok is None else ("pass" if bool(ok) else "fail")
    except Exception as exc:  # a crashing case is a failing case
        status, detail = "fail", {"error": f"{type(exc).__name__}: {exc}"}
    return Case(name, status, detail, time.perf_counter() - t)


def suite_table(args):
    def run():
        entries = classify_table()
        return len(entries) == 75, {"classes": len(entries)}

    return VerificationReport("table", [_timed("75 classes, bins and distinct invariants", run)])


def _principal_case(item):
    name, order = item

    def run():
        lat = parse_lattice(name)
        pp = lift.PrincipalPart.from_form(build_F_lambda(lat, order))
        closed = lift.closed_form_principal_part(lat)
        return pp.as_dict() == closed.as_dict(), {}

    return _timed(f"principal part {name}", run)


def _pool_map(fn, items, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def suite_principal(args):
    items = [(e.name, args.order) for e in classify_table()]
    return VerificationReport("principal", _pool_map(_principal_case, items, args.jobs))


def suite_lift(args):
    report = VerificationReport("lift")
    for row in lift.verify_lift_formulas(order=1, jobs=args.jobs):
        report.cases.append(Case(f"lift {row.name}", "pass" if row.ok else "fail", row.to_json()))
    return report


def suite_combined(args):
    def case_u():
        comb, _, pf, lam = lift.combined_lift_profile("U")
        want = heegner.FormalDivisor(comb.named.node, {"D": 513, "H": -32})
        ok = comb.weight == -4 * 513 * 1023 and comb.named.equivalent(want)
        return ok, {"weight": str(comb.weight), "divisor": comb.named.canonical().render()}

    def case_u2():
        comb, _, pf, lam = lift.combined_lift_profile("U(2)")
        node = comb.named.node
        ok = (
            pf.weight == 68
            and pf.named.equivalent(heegner.FormalDivisor(node, {"D": 1, "H(-1,e11)": 16}))
            and comb.named.equivalent(heegner.FormalDivisor(node, {"D": 257, "H1": -16}))
        )
        return ok, {"f_weight": str(pf.weight), "divisor": comb.named.canonical().render()}

    return VerificationReport("combined", [_timed("combined lift M=U", case_u), _timed("combined lift M=U(2)", case_u2)])


def suite_balance(args):
    report = VerificationReport("balance")
    for row in heegner.divisor_table():
        chi = row["chi8"]
        status = "pass" if chi.matches_printed else "inconclusive"
        report.cases.append(Case(f"chi8 row {row['lambda_name']}", status, chi.to_json()))
    for src, dst, ok in heegner.pullback_chain_check():
        report.cases.append(Case(f"pullback {src} -> {dst}", "pass" if ok else "fail"))
    for b in heegner.balance_sweep():
        report.cases.append(Case(f"balance M{b.m_node}", "pass" if b.ok else "fail", b.to_json()))
    return report


def suite_modularity(args):
    order = max(args.order, 200)

    def make(name):
        def run():
            form = build_F_lambda(parse_lattice(name), order)
            rep = check_modularity(form, MODULARITY_SAMPLES, tol=args.tol)
            return rep.ok, rep.to_json()

        return run

    return VerificationReport("modularity", [_timed(f"modularity {n}", make(n)) for n in MODULARITY_LATTICES])


def suite_theta(args):
    rng = np.random.default_rng(args.seed)
    report = VerificationReport("theta")

    def jacobi():
        worst = 0.0
        for _ in range(10):
            tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.7, 1.6))
            c = siegel.chi8([[tau]]).value
            e = eta_power(1, 24, 80).evaluate(tau)[0]
            worst = max(worst, abs(c - 256 * e) / abs(c))
        return worst < 1e-10, {"max_rel_err": worst}

    def symmetric():
        worst = 0.0
        for g in (1, 2, 3):
            for _ in range(5):
                om = random_siegel_point(rng, g)
                th = siegel.all_thetas(om)
                v = np.array([t.value**8 for t in th.values()])
                u = siegel.upsilon(om, thetas=th).value
                elem = np.poly(-v)[len(v) - 1]
                worst = max(worst, abs(u - elem) / abs(u))
        return worst < 1e-8, {"max_rel_err": worst}

    def constants():
        c1 = siegel.bosonization_constant(1)
        c0 = siegel.bosonization_constant(0)
        # second route: zeta'(-1) = 1/12 - log A with A the Glaisher-Kinkelin constant
        with mpmath.workdps(30):
            other = float(mpmath.exp(12 * (mpmath.mpf(1) / 12 - mpmath.log(mpmath.glaisher)) - mpmath.mpf(1) / 2))
        ok = c1 == 1 / (4 * math.pi) and abs(c0 - other) < 1e-12 * other
        return ok, {"c0": c0, "c1": c1}

    report.cases.append(_timed("chi_1^8 = 2^8 eta^24", jacobi))
    report.cases.append(_timed("Upsilon is the elementary symmetric polynomial", symmetric))
    report.cases.append(_timed("bosonization constants", constants))
    return report


def random_siegel_point(rng, g, spread=0.5):
    y = rng.normal(size=(g, g))
    y = y @ y.T / g + (0.6 + spread) * np.eye(g)
    x = rng.uniform(-0.5, 0.5, size=(g, g))
    return siegel.SiegelPoint((x + x.T) / 2 + 1j * y)


SUITES = {
    "table": suite_table,
    "principal": suite_principal,
    "lift": suite_lift,
    "combined": suite_combined,
    "balance": suite_balance,
    "modularity": suite_modularity,
    "theta": suite_theta,
}


# --- commands ---------------------------------------------------------------------


def cmd_classify(args):
    rows = [
        {"name": e.name, "r": e.inv.r, "l": e.inv.l, "delta": e.inv.delta, "g": e.inv.g, "k": e.inv.k,
         "signature": list(e.sign)}
        for e in classify_table()
    ]
    text = "\n".join(f"{r['name']:20s} r={r['r']:2d} l={r['l']:2d} delta={r['delta']} g={r['g']:2d}" for r in rows)
    _emit(rows, args.json, text + f"\n{len(rows)} classes")
    return 0


def cmd_vvmf(args):
    lat = parse_lattice(args.lattice)
    form = (build_F_lambda if args.form == "F" else build_f_lambda)(lat, args.order)
    out = {"principal_part": lift.PrincipalPart.from_form(form).to_json(), "weight": str(form.weight)}
    if args.check:
        rep = check_modularity(form, MODULARITY_SAMPLES, tol=args.tol)
        out["modularity"] = rep.to_json()
    if args.full:
        out["form"] = form.to_json()
    _emit(out, True)
    return 0 if not args.check or out["modularity"]["ok"] else 1


def cmd_lift(args):
    lat = parse_lattice(args.lattice)
    ell = Fraction(args.ell)
    if args.form == "combined":
        prof, _, _, _ = lift.combined_lift_profile(lat)
    else:
        if invariants(lat).role != "Lambda":
            raise LatticeError("F and f are defined on the b+ = 2 side; pass Lambda or use '(M)perp'")
        form = (build_F_lambda if args.form == "F" else build_f_lambda)(lat, 1)
        prof = lift.lift_profile(lift.PrincipalPart.from_form(form), lat)
    prof = prof.scale(ell)
    out = prof.to_json()
    out["canonical"] = prof.named.canonical().render()
    if args.form == "F":
        out["integrality"] = lift.integrality_scale(lat).to_json()
    _emit(out, args.json, f"weight {prof.weight}\ndivisor {out['canonical']}")
    return 0


def cmd_divisors(args):
    inv = heegner.m_invariants(parse_lattice(args.M))
    out = {"M": list(inv.triple), "chi8": heegner.chi8_divisor(inv).to_json()}
    if inv.delta == 0 and inv.r in (2, 10):
        out["upsilon"] = heegner.upsilon_divisor(inv).to_json()
    bal = heegner.weight_balance_check(inv)
    out["balance"] = bal.to_json()
    _emit(out, args.json)
    return 0 if bal.ok else 1


def cmd_theta(args):
    if args.identity:
        ns = argparse.Namespace(seed=args.seed, suite="theta")
        rng = np.random.default_rng(args.seed)
        if args.identity == "petersson":
            report = VerificationReport("petersson")
            for g in (1, 2):
                for t in range(args.trials):
                    pt = random_siegel_point(rng, g)
                    report.cases.append(_timed(f"g={g} trial {t}", lambda pt=pt: _petersson_case(pt)))
        else:
            report = suite_theta(ns)
            keep = {"jacobi": "chi_1^8", "symmetric": "Upsilon"}[args.identity]
            report.cases = [c for c in report.cases if c.name.startswith(keep)]
        _emit(report.to_json(), args.json, report.text())
        return report.exit_code
    if args.omega is None:
        raise SystemExit("theta: give --omega or --identity")
    pt = siegel.SiegelPoint.from_json(json.loads(args.omega))
    if args.char:
        val = siegel.theta_constant(siegel.ThetaChar.parse(args.char), pt, args.tol)
        out = {"value": val.value, "tail_bound": val.tail_bound, "points": val.points}
    else:
        th = siegel.all_thetas(pt, args.tol)
        out = {
            "chi8": siegel.chi8(pt, thetas=th).to_json(),
            "upsilon": siegel.upsilon(pt, thetas=th).to_json(),
            "probe": siegel.two_vanish_probe(pt).to_json(),
        }
    _emit(out, True)
    return 0


def _petersson_case(pt):
    w = siegel.chi8_weight(pt.g)
    base = siegel.log_petersson(siegel.chi8(pt).value, w, pt)
    eye = np.eye(pt.g, dtype=int)
    moved = [pt.translate(eye), pt.invert(), pt.rotate(eye[::-1])]
    worst = max(abs(siegel.log_petersson(siegel.chi8(q).value, w, q) - base) for q in moved)
    return worst < 1e-8, {"max_log_diff": worst}


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    report = VerificationReport(args.suite)
    for name in names:
        report.extend(SUITES[name](args))
    _emit(report.to_json(), args.json, report.text())
    return report.exit_code


def build_parser():
    p = argparse.ArgumentParser(prog="k3kit", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--order", type=int, default=8, help="q-series truncation order")
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("classify", parents=[common], help="the 75 classes with b+ = 2")

    v = sub.add_parser("vvmf", parents=[common], help="principal part (and modularity) of F or f")
    v.add_argument("--lattice", required=True)
    v.add_argument("--form", choices=["F", "f"], default="F")
    v.add_argument("--check", action="store_true", help="numeric S/T check at three points")
    v.add_argument("--full", action="store_true", help="include every component series")

    li = sub.add_parser("lift", parents=[common], help="weight and divisor of a Borcherds lift")
    li.add_argument("--lattice", required=True)
    li.add_argument("--form", choices=["F", "f", "combined"], default="F")
    li.add_argument("--ell", type=int, default=1)

    d = sub.add_parser("divisors", parents=[common], help="theta-null divisor rows and balance for M")
    d.add_argument("--M", required=True)

    t = sub.add_parser("theta", parents=[common], help="theta constants and identity trials")
    t.add_argument("--g", type=int)
    t.add_argument("--omega", help="JSON [[[re, im], ...], ...]")
    t.add_argument("--char", help="characteristic 'a,b' as bit strings")
    t.add_argument("--identity", choices=["jacobi", "symmetric", "petersson"])
    t.add_argument("--trials", type=int, default=5)

    ve = sub.add_parser("verify", parents=[common], help="run verification suites")
    ve.add_argument("suite", nargs="?", default="all", choices=["all", *SUITES])
    ve.add_argument("--balance", action="store_const", const="balance", dest="suite")
    return p


COMMANDS = {
    "classify": cmd_classify,
    "vvmf": cmd_vvmf,
    "lift": cmd_lift,
    "divisors": cmd_divisors,
    "theta": cmd_theta,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "theta" and args.tol == 1e-6 and not args.identity:
        args.tol = 1e-14
    try:
        return COMMANDS[args.command](args)
    except (LatticeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
