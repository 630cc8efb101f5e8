"""``cflab`` command line: expand, closed-form, omega, verify, measure, openq, square.

Every command prints one JSON report on stdout. With ``--no-meta`` the report
has no timing fields, so identical flags give byte-identical output.

Exit codes: 0 success, 2 mismatch or counterexample, 3 precision exhausted,
4 invalid input.
"""

from __future__ import annotations

import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources

import click

from . import __version__
from .cfrac import (
    DivisibilityError,
    expand,
    first_mismatch,
    open_question_check,
)
from .closedform import (
    DEFAULT_DEPTH_CAP,
    ConsistencyError,
    omega_build,
    omega_length,
    square_relation_check,
    w1_quotient_degree,
    w1_quotients,
    w1_special_convergents,
    w2_quotient_degree,
    w2_quotients,
    w2_special_convergents,
)
from .diophantine import (
    lambda_bounds_check,
    measure_estimate,
    predicted_nu,
    voloch_hypothesis_check,
)
from .gfpoly import Poly, PolySyntaxError, format_poly, parse_poly
from .laurent import EquationSpec, PrecisionExhausted, RootError, solve_root

EXIT_OK, EXIT_MISMATCH, EXIT_EXHAUSTED, EXIT_INVALID = 0, 2, 3, 4

CATALOG = {
    "E1": ("T", "T"),
    "E2": ("T^2", "T"),
    "W1": ("T", "1"),
    "W2": ("T^2", "T"),
}

GUARD = 32
MAX_PRECISION = 1 << 23


class Exhausted(Exception):
    def __init__(self, report):
        super().__init__("precision exhausted")
        self.report = report


class Mismatch(Exception):
    def __init__(self, report):
        super().__init__("mismatch")
        self.report = report


# -- helpers -----------------------------------------------------------------


def bundled_fixture() -> list[Poly]:
    text = resources.files("cflab").joinpath("data/omega5_E1_T_T.txt").read_text()
    return read_fixture_text(text)


def read_fixture_text(text: str, p: int = 3) -> list[Poly]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse_poly(line, p))
    return out


def build_spec(family, A, C, raw, p) -> EquationSpec:
    if raw is not None:
        parts = [s.strip() for s in raw.split(",")]
        return EquationSpec.make("RAW", raw=parts, p=p)
    if family is None:
        raise click.UsageError("give --family or --raw")
    fam = family.upper()
    if fam in CATALOG:
        A = CATALOG[fam][0] if A is None else A
        C = CATALOG[fam][1] if C is None else C
    return EquationSpec.make(fam, A, C, p=p)


def _omega_degrees_for(eq: EquationSpec, n: int) -> list[int] | None:
    if eq.family not in ("E1", "E2", "MR") or (eq.family != "MR" and not eq.c_divides_a):
        return None
    depth = 1
    while omega_length(eq.family, depth) < n + 1:
        depth += 1
    if eq.family == "MR" and eq.p != 3:
        return None
    om = omega_build(eq.family, eq.A, eq.C, depth, depth_cap=max(depth, DEFAULT_DEPTH_CAP))
    return om.degrees()


def degree_law(eq: EquationSpec, n: int) -> list[int] | None:
    """Expected degrees of a_1..a_(n+1), when a closed form or Omega recursion is available."""
    if eq.family in ("W1", "W2") and eq.c_divides_a:
        a, c = int(eq.A.degree), int(eq.C.degree)
        f = w1_quotient_degree if eq.family == "W1" else w2_quotient_degree
        return [f(a, c, k) for k in range(1, n + 2)]
    return _omega_degrees_for(eq, n)


def estimate_precision(eq: EquationSpec, n: int) -> int:
    """Coefficients of the root needed to certify n partial quotients."""
    law = degree_law(eq, n)
    if law is not None:
        return 2 * sum(law[:n]) + law[n] + GUARD
    # no law: probe, then extrapolate with the d_sum ~ n^1.6 growth seen in these families
    probe = 256
    cf = expand(solve_root(eq, probe), n)
    got = len(cf.partials)
    if got >= n:
        return probe
    got = max(got, 1)
    return int(probe * (n / got) ** 1.6 * 1.25) + GUARD


def expand_terms(eq: EquationSpec, n: int, precision: int | None = None):
    """Expand the root to n partial quotients, retrying once at double precision."""
    prec = precision if precision is not None else estimate_precision(eq, n)
    for attempt in range(2):
        if prec > MAX_PRECISION:
            break
        cf = expand(solve_root(eq, prec), n)
        if len(cf.partials) >= n:
            return cf, prec
        prec *= 2
    raise Exhausted({"terms_requested": n, "terms_obtained": len(cf.partials), "precision_used": prec // 2})


def _q(xs) -> list[str]:
    return [format_poly(x) for x in xs]


def _mismatch_entry(index0: int, got: list[Poly], want: list[Poly]) -> dict:
    return {"index": index0 + 1, "engine": format_poly(got[index0]), "generator": format_poly(want[index0])}


def emit(ctx, command: str, result: dict, eq: EquationSpec | None = None, t0: float | None = None,
         extra_meta: dict | None = None):
    obj = ctx.obj
    report = {"tool": "cflab", "version": __version__, "command": command}
    if eq is not None:
        report["equation"] = eq.to_json()
        report["quartic"] = eq.quartic().to_strings()
    report["result"] = result
    if not obj["no_meta"]:
        meta = {"wall_time": round(time.perf_counter() - t0, 6) if t0 is not None else None}
        if extra_meta:
            meta.update(extra_meta)
        report["meta"] = meta
    click.echo(json.dumps(report, indent=2, sort_keys=True))


def write_artifact(out, fmt, json_obj, csv_text):
    if out is None:
        return
    with open(out, "w", encoding="utf-8") as fh:
        if fmt == "csv":
            fh.write(csv_text)
        else:
            fh.write(json.dumps(json_obj, indent=2, sort_keys=True) + "\n")


def _seq_csv(seq) -> str:
    rows = ["index,quotient,degree"]
    for i, a in enumerate(seq, start=1):
        rows.append(f"{i},{format_poly(a)},{int(a.degree)}")
    return "\n".join(rows) + "\n"


def _run_batch(fn, specs, jobs):
    if jobs <= 1:
        return [fn(s) for s in specs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, specs))


def _load_batch(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise click.UsageError("batch file must hold a JSON list of equation objects")
    return data


# -- shared options -----------------------------------------------------------


def equation_options(f):
    f = click.option("--family", type=str, default=None, help="W1, W2, E1, E2 or MR.")(f)
    f = click.option("--A", "A", type=str, default=None, help="Polynomial A, e.g. 'T^2+1'.")(f)
    f = click.option("--C", "C", type=str, default=None, help="Polynomial C.")(f)
    f = click.option("--raw", type=str, default=None, help="Quartic coefficients c4,c3,c2,c1,c0.")(f)
    f = click.option("--p", "p", type=int, default=3, show_default=True, help="Field characteristic.")(f)
    return f


def output_options(f):
    f = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the artifact here.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)(f)
    return f


@click.group()
@click.version_option(__version__, prog_name="cflab")
@click.option("--no-meta", is_flag=True, help="Omit timings so reports are byte-identical across runs.")
@click.pass_context
def cli(ctx, no_meta):
    """Continued fractions of quartic power series over F_p."""
    ctx.ensure_object(dict)
    ctx.obj["no_meta"] = no_meta


# -- expand -------------------------------------------------------------------


def _expand_job(args):
    spec_json, terms, precision = args
    eq = EquationSpec.from_json(spec_json)
    try:
        cf, prec = expand_terms(eq, terms, precision)
    except Exhausted as exc:
        return {"equation": eq.to_json(), "status": "exhausted", **exc.report}
    return {"equation": eq.to_json(), "status": "ok", "precision_used": prec, "cf": cf.to_json()}


@cli.command("expand")
@equation_options
@output_options
@click.option("--terms", type=int, default=20, show_default=True, help="Partial quotients after a_0.")
@click.option("--precision", type=int, default=None, help="Root precision; auto-sized when omitted.")
@click.option("--batch", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON list of equations to expand instead of a single one.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes for --batch.")
@click.pass_context
def cmd_expand(ctx, family, A, C, raw, p, out, fmt, terms, precision, batch, jobs):
    """Solve the quartic and expand its root."""
    t0 = time.perf_counter()
    if batch is not None:
        specs = [EquationSpec.from_json(d).to_json() for d in _load_batch(batch)]
        results = _run_batch(_expand_job, [(s, terms, precision) for s in specs], jobs)
        emit(ctx, "expand", {"batch": results}, t0=t0)
        if any(r["status"] != "ok" for r in results):
            ctx.exit(EXIT_EXHAUSTED)
        return
    eq = build_spec(family, A, C, raw, p)
    try:
        cf, prec = expand_terms(eq, terms, precision)
    except Exhausted as exc:
        emit(ctx, "expand", {"status": "exhausted", **exc.report}, eq, t0)
        ctx.exit(EXIT_EXHAUSTED)
    write_artifact(out, fmt, cf.to_json(), cf.to_csv())
    result = {"status": "ok", "terms": len(cf.partials), "cf": cf.to_json()}
    emit(ctx, "expand", result, eq, t0, {"precision_used": prec})


# -- closed-form ---------------------------------------------------------------


@cli.command("closed-form")
@equation_options
@output_options
@click.option("--terms", type=int, default=6, show_default=True)
@click.pass_context
def cmd_closed_form(ctx, family, A, C, raw, p, out, fmt, terms):
    """Closed-form quotients (C | A) or special convergents (C does not divide A) for W1/W2."""
    t0 = time.perf_counter()
    eq = build_spec(family, A, C, raw, p)
    if eq.family not in ("W1", "W2"):
        raise click.UsageError("closed-form is available for W1 and W2")
    if eq.c_divides_a:
        gen = w1_quotients if eq.family == "W1" else w2_quotients
        qs = gen(eq.A, eq.C, terms)
        result = {"kind": "quotients", "quotients": _q(qs), "degrees": [int(q.degree) for q in qs]}
        write_artifact(out, fmt, result, _seq_csv(qs))
    else:
        gen = w1_special_convergents if eq.family == "W1" else w2_special_convergents
        seq = gen(eq.A, eq.C, terms)
        result = {
            "kind": "special_convergents",
            "P": _q(seq.P),
            "Q": _q(seq.Q),
            "q_degrees": seq.q_degrees(),
        }
        write_artifact(out, fmt, result, _seq_csv(seq.Q))
    emit(ctx, "closed-form", result, eq, t0)


# -- omega ------------------------------------------------------------------------


@cli.command("omega")
@equation_options
@output_options
@click.option("--depth", type=int, default=DEFAULT_DEPTH_CAP, show_default=True)
@click.option("--allow-deep", is_flag=True, help=f"Permit depth above {DEFAULT_DEPTH_CAP}.")
@click.pass_context
def cmd_omega(ctx, family, A, C, raw, p, out, fmt, depth, allow_deep):
    """Build Omega_depth from its recursion."""
    t0 = time.perf_counter()
    eq = build_spec(family, A, C, raw, p)
    cap = max(depth, DEFAULT_DEPTH_CAP) if allow_deep else DEFAULT_DEPTH_CAP
    try:
        om = omega_build(eq.family, eq.A, eq.C, depth, p=eq.p, depth_cap=cap)
    except DivisibilityError as exc:
        emit(ctx, "omega", {"status": "counterexample candidate", "index": exc.index, "detail": str(exc)}, eq, t0)
        ctx.exit(EXIT_MISMATCH)
    result = {"status": "ok", "length": len(om), **om.to_json()}
    write_artifact(out, fmt, om.to_json(), _seq_csv(om.entries))
    emit(ctx, "omega", result, eq, t0)


# -- verify --------------------------------------------------------------------


def verify_equation(eq: EquationSpec, depth: int, terms: int | None, precision: int | None,
                    fixture: list[Poly] | None) -> dict:
    """Engine vs generator (and fixture); returns a VerifyReport-shaped dict."""
    if eq.family in ("E1", "E2", "MR"):
        if eq.family != "MR" and not eq.c_divides_a:
            raise click.UsageError("the Omega recursion needs C | A")
        om = omega_build(eq.family, eq.A, eq.C, depth, p=eq.p, depth_cap=max(depth, DEFAULT_DEPTH_CAP))
        want = list(om.entries)
        source = f"omega depth {depth}"
    elif eq.family in ("W1", "W2"):
        if not eq.c_divides_a:
            raise click.UsageError("closed-form quotients need C | A")
        n = terms or 6
        want = (w1_quotients if eq.family == "W1" else w2_quotients)(eq.A, eq.C, n)
        source = "closed form"
    else:
        raise click.UsageError("verify needs a named family")
    n = len(want)
    cf, prec = expand_terms(eq, n, precision)
    got = list(cf.partials[:n])
    comparisons = {"generator": want}
    if fixture is not None:
        comparisons["fixture"] = fixture
    report = {
        "generator_source": source,
        "generator_length": n,
        "engine_length": len(got),
        "precision_used": prec,
        "a0": format_poly(cf.a0),
    }
    first = None
    for name, ref in comparisons.items():
        mm = first_mismatch(got, ref)
        if mm is None and len(ref) > len(got):
            mm = len(got)
        entry = {"length": len(ref), "first_mismatch": None}
        if mm is not None and mm < len(got) and mm < len(ref):
            entry["first_mismatch"] = _mismatch_entry(mm, got, ref)
        elif mm is not None:
            entry["first_mismatch"] = {"index": mm + 1, "engine": None, "generator": format_poly(ref[mm])}
        entry["matched_prefix_length"] = min(len(got), len(ref)) if mm is None else mm
        report[name] = entry
        if mm is not None and (first is None or mm < first[0]):
            first = (mm, entry["first_mismatch"])
    if fixture is not None:
        fm = first_mismatch(want, fixture)
        report["generator_vs_fixture_mismatch"] = None if fm is None else fm + 1
        if fm is not None and (first is None or fm < first[0]):
            first = (fm, {"index": fm + 1, "engine": None, "generator": format_poly(want[fm])})
    if not cf.a0.is_zero():
        first = (-1, {"index": 0, "engine": format_poly(cf.a0), "generator": "0"})
    report["matched_prefix_length"] = min(e["matched_prefix_length"] for k, e in report.items()
                                          if isinstance(e, dict) and "matched_prefix_length" in e)
    report["first_mismatch"] = None if first is None else first[1]
    report["status"] = "match" if first is None else "mismatch"
    return report


def _verify_job(args):
    spec_json, depth, terms, precision = args
    eq = EquationSpec.from_json(spec_json)
    try:
        r = verify_equation(eq, depth, terms, precision, None)
    except Exhausted as exc:
        r = {"status": "exhausted", **exc.report}
    return {"equation": eq.to_json(), **r}


@cli.command("verify")
@equation_options
@click.option("--depth", type=int, default=DEFAULT_DEPTH_CAP, show_default=True, help="Omega depth (E1, E2, MR).")
@click.option("--terms", type=int, default=None, help="Closed-form quotients to compare (W1, W2).")
@click.option("--precision", type=int, default=None)
@click.option("--fixture", type=click.Path(exists=True, dir_okay=False), default=None,
              help="File of quotients, one per line, to compare as well.")
@click.option("--batch", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.pass_context
def cmd_verify(ctx, family, A, C, raw, p, depth, terms, precision, fixture, batch, jobs):
    """Compare the engine expansion with the family's generator."""
    t0 = time.perf_counter()
    if batch is not None:
        specs = [EquationSpec.from_json(d).to_json() for d in _load_batch(batch)]
        results = _run_batch(_verify_job, [(s, depth, terms, precision) for s in specs], jobs)
        emit(ctx, "verify", {"batch": results}, t0=t0)
        if any(r["status"] == "mismatch" for r in results):
            ctx.exit(EXIT_MISMATCH)
        if any(r["status"] == "exhausted" for r in results):
            ctx.exit(EXIT_EXHAUSTED)
        return
    eq = build_spec(family, A, C, raw, p)
    fx = None
    if fixture is not None:
        with open(fixture, encoding="utf-8") as fh:
            fx = read_fixture_text(fh.read(), eq.p)
    elif (eq.family == "E1" and eq.A == Poly.T(3) and eq.C == Poly.T(3) and depth == 5):
        fx = bundled_fixture()
    try:
        report = verify_equation(eq, depth, terms, precision, fx)
    except Exhausted as exc:
        emit(ctx, "verify", {"status": "exhausted", **exc.report}, eq, t0)
        ctx.exit(EXIT_EXHAUSTED)
    emit(ctx, "verify", report, eq, t0)
    if report["status"] != "match":
        ctx.exit(EXIT_MISMATCH)


# -- measure -------------------------------------------------------------------


@cli.command("measure")
@equation_options
@output_options
@click.option("--terms", type=int, default=16, show_default=True)
@click.option("--n0", type=int, default=None, help="Tail start; defaults to half the ratios.")
@click.option("--precision", type=int, default=None)
@click.option("--source", type=click.Choice(["auto", "engine", "closed-form"]), default="auto", show_default=True,
              help="Where quotient degrees come from; auto uses the closed form when C | A for W1/W2.")
@click.option("--voloch", "voloch_pairs", type=int, default=0,
              help="Also fit the special-convergent laws on this many pairs (W1/W2, C not dividing A).")
@click.option("--lambda-depth", type=int, default=0, help="Also check the lambda bounds up to this i (E1).")
@click.pass_context
def cmd_measure(ctx, family, A, C, raw, p, out, fmt, terms, n0, precision, source, voloch_pairs, lambda_depth):
    """Estimate the approximation exponent from quotient degrees."""
    t0 = time.perf_counter()
    eq = build_spec(family, A, C, raw, p)
    use_closed = eq.family in ("W1", "W2") and eq.c_divides_a and source != "engine"
    if source == "closed-form" and not use_closed:
        raise click.UsageError("closed-form degrees exist only for W1/W2 with C | A")
    meta = {}
    if use_closed:
        a, c = int(eq.A.degree), int(eq.C.degree)
        f = w1_quotient_degree if eq.family == "W1" else w2_quotient_degree
        degrees = [f(a, c, k) for k in range(1, terms + 1)]
        used = "closed-form"
    else:
        try:
            cf, prec = expand_terms(eq, terms, precision)
        except Exhausted as exc:
            emit(ctx, "measure", {"status": "exhausted", **exc.report}, eq, t0)
            ctx.exit(EXIT_EXHAUSTED)
        degrees = cf.degrees()[:terms]
        used = "engine"
        meta["precision_used"] = prec
    try:
        est = measure_estimate(degrees, n0, predicted_nu(eq))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    A_s = None if eq.A is None else format_poly(eq.A)
    C_s = None if eq.C is None else format_poly(eq.C)
    result = est.to_json(eq.family, A_s, C_s, terms)
    result["degrees"] = degrees
    result["source"] = used
    if voloch_pairs:
        result["voloch"] = _voloch(eq, voloch_pairs)
    if lambda_depth:
        if eq.family != "E1" or not eq.c_divides_a:
            raise click.UsageError("lambda bounds apply to E1 with C | A")
        result["lambda_bounds"] = _lambda(eq, lambda_depth)
    write_artifact(out, fmt, result, "n,ratio\n" + "".join(f"{i},{r}\n" for i, r in enumerate(result["ratios"], 1)))
    emit(ctx, "measure", result, eq, t0, meta)


def _voloch(eq: EquationSpec, pairs: int) -> dict:
    if eq.family not in ("W1", "W2"):
        raise click.UsageError("the special-convergent fit applies to W1/W2")
    gen = w1_special_convergents if eq.family == "W1" else w2_special_convergents
    seq = gen(eq.A, eq.C, pairs - 1)
    a, c = int(eq.A.degree), int(eq.C.degree)
    if eq.family == "W1":
        need = 2 * 3 ** pairs * a + 4 * a + GUARD
        pred = 4 - Fraction(c, a)
    else:
        need = 2 * 3 ** (pairs + 1) * a + GUARD
        pred = 4 - Fraction(3 * c, a)
    root = solve_root(eq, need)
    if eq.family == "W2":
        root = root.invert()
    chk = voloch_hypothesis_check(seq, root, pred, Fraction(3))
    return chk.to_json()


def _lambda(eq: EquationSpec, depth: int) -> dict:
    a, c = int(eq.A.degree), int(eq.C.degree)
    from .diophantine import central_degree, deg_v_before_central

    need = int(2 * deg_v_before_central(a, c, depth)) + 2 * central_degree(a, c, depth) + GUARD
    root = solve_root(eq, need)
    return lambda_bounds_check(expand(root), eq.A, eq.C, depth, root=root)


# -- openq ---------------------------------------------------------------------


@cli.command("openq")
@click.option("--from-omega", "from_omega", type=str, default=None, help="Take the sequence from an Omega build (E1/E2/MR).")
@click.option("--seq", "seq_text", type=str, default=None, help="Comma separated a_1,...,a_n.")
@click.option("--A", "A", type=str, default=None)
@click.option("--C", "C", type=str, default=None)
@click.option("--p", "p", type=int, default=3, show_default=True)
@click.option("--depth", type=int, default=2, show_default=True)
@click.option("--D", "D", type=str, required=True, help="The divisor D.")
@click.pass_context
def cmd_openq(ctx, from_omega, seq_text, A, C, p, depth, D):
    """Test the reversal identity and its claimed consequence on one sequence."""
    t0 = time.perf_counter()
    if (from_omega is None) == (seq_text is None):
        raise click.UsageError("give exactly one of --from-omega and --seq")
    eq = None
    if from_omega is not None:
        eq = build_spec(from_omega, A, C, None, p)
        seq = list(omega_build(eq.family, eq.A, eq.C, depth, p=eq.p).entries)
    else:
        seq = [parse_poly(s.strip(), p) for s in seq_text.split(",")]
    Dp = parse_poly(D, p)
    rep = open_question_check(seq, Dp)
    result = {"sequence": _q(seq), "D": format_poly(Dp), **rep.to_json()}
    emit(ctx, "openq", result, eq, t0)
    if rep.status == "counterexample":
        ctx.exit(EXIT_MISMATCH)


# -- square ----------------------------------------------------------------------


@cli.command("square")
@click.option("--A", "A", type=str, default="T", show_default=True)
@click.option("--C", "C", type=str, default="1", show_default=True)
@click.option("--terms", type=int, default=5, show_default=True)
@click.pass_context
def cmd_square(ctx, A, C, terms):
    """Check both squaring relations between the W1 and E1 expansions."""
    t0 = time.perf_counter()
    eq = EquationSpec.make("W1", A, C)
    rep = square_relation_check(eq.A, eq.C, terms)
    emit(ctx, "square", rep, eq, t0)
    if not rep["ok"]:
        ctx.exit(EXIT_MISMATCH)


# -- entry point -----------------------------------------------------------------


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="cflab", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return EXIT_INVALID
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except (ValueError, PolySyntaxError, RootError, ConsistencyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    except DivisibilityError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_MISMATCH
    except PrecisionExhausted as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_EXHAUSTED
    return rv if isinstance(rv, int) else EXIT_OK


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
