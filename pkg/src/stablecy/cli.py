"""Command-line front end: ``stablecy <command> ...`` (or ``python3 -m stablecy``).

Every command builds one JSON payload (a run report). ``--json`` prints it and
the default renders a short human summary from the same payload. Exit codes:
0 success, 1 usage or parse error, 2 failed audit, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from collections import Counter
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .algebra import (AlgebraError, BoundQuiverAlgebra, BoundTooSmall, FrobeniusForm, NotMultiplicative,
                      ParseError, build_algebra, find_frobenius_form, is_symmetric_form, nakayama_automorphism,
                      parse_algebra_text)
from .bimod import ResourceLimit, bruteforce_scydim
from .classify import InadmissibleType, parse_range, recheck, scydim, sweep
from .exactlin import Field
from .families import (BadParameters, UnsupportedType, construct_family, expected_resolution_term, parse_type,
                       witness_inner_element)
from .morph import AlgebraMorphism, RightIdeal, is_inner, stable_hom_cyclic, stably_inner_certificate

EXIT_OK, EXIT_USAGE, EXIT_AUDIT, EXIT_RESOURCE = 0, 1, 2, 3
DEFAULT_SEED = 20240601


class UsageError(Exception):
    pass


class Report:
    """Accumulates results, audits and timings for one run."""

    def __init__(self, argv: list[str], args):
        self.argv = list(argv)
        self.args = args
        self.results: dict = {}
        self.audit: list[dict] = []
        self.timings: dict[str, float] = {}

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.audit.append({"check": name, "ok": bool(ok), "detail": detail})
        return ok

    def timed(self, name: str, fn: Callable, *a, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 4)

    @property
    def failed(self) -> bool:
        return any(not a["ok"] for a in self.audit)

    def payload(self) -> dict:
        out = {
            "command": self.argv,
            "version": __version__,
            "seed": self.args.seed,
            "field": str(field_of(self.args)),
            "results": self.results,
            "audit": self.audit,
        }
        if not self.args.stable_output:
            out["timings"] = self.timings
        return out


def field_of(args) -> Field:
    return Field(args.char)


# -- input parsing -----------------------------------------------------------------

def load_algebra(target: str, field: Field, bound: int | None = None):
    """A family shorthand gives a bundle; a file path gives a bare algebra.  Returns (algebra, bundle)."""
    if os.path.exists(target):
        with open(target) as fh:
            text = fh.read()
        quiver, relations, fld, file_bound = parse_algebra_text(text, field)
        A = build_algebra(quiver, relations, fld, bound or file_bound)
        return A, None
    try:
        t = parse_type(target)
    except BadParameters as exc:
        raise UsageError(f"{target!r} is neither a file nor a type shorthand: {exc}") from exc
    bundle = construct_family(t, field)
    return bundle.algebra, bundle


_TERM_SPLIT = re.compile(r"\s*([+-])\s*")
_COEFF = re.compile(r"^(\d+(?:/\d+)?)\s*(?:\*\s*|\s+|$)")


def parse_element(A: BoundQuiverAlgebra, text: str) -> np.ndarray:
    """Parse ``t + 2*t^3`` or ``e_1 - a_h1_1 b``; factors are written left to right as products."""
    f = A.field
    text = text.strip()
    if not text:
        raise ParseError("empty element")
    if text[0] not in "+-":
        text = "+" + text
    parts = _TERM_SPLIT.split(text)[1:]
    out = A.zero()
    for sign, term in zip(parts[0::2], parts[1::2]):
        m = _COEFF.match(term)
        coeff = Fraction(1)
        if m:
            coeff = Fraction(m.group(1))
            term = term[m.end():]
        if sign == "-":
            coeff = -coeff
        x = A.one()
        for fac in filter(None, re.split(r"[\s*]+", term)):
            x = A.mul(x, _factor(A, fac))
        out = f.reduce(out + f(coeff) * x) if f.p else out + f(coeff) * x
    return out


def _factor(A: BoundQuiverAlgebra, fac: str) -> np.ndarray:
    base, _, power = fac.partition("^")
    k = int(power) if power else 1
    if base == "1":
        x = A.one()
    elif base.startswith("e_") and base[2:] in A.vertex_index:
        x = A.idempotent(base[2:])
    elif base in A.arrow_index:
        x = A.arrow(base)
    else:
        raise ParseError(f"unknown generator {base!r}")
    out = A.one()
    for _ in range(k):
        out = A.mul(out, x)
    return out


def parse_map(A: BoundQuiverAlgebra, text: str) -> AlgebraMorphism:
    """``t -> t + t^3``; several assignments separated by ``;``."""
    images = {}
    for part in filter(None, (s.strip() for s in text.split(";"))):
        lhs, arrow, rhs = part.partition("->")
        if not arrow:
            raise ParseError(f"expected 'generator -> image' in {part!r}")
        key = lhs.strip()
        if key.startswith("e_"):
            key = key[2:]
        if key not in A.arrow_index and key not in A.vertex_index:
            raise ParseError(f"unknown generator {lhs.strip()!r}")
        images[key] = parse_element(A, rhs)
    for a in A.quiver.arrows:
        images.setdefault(a, A.arrow(a))
    return AlgebraMorphism.from_generators(A, images, check=True)


def parse_generators(A: BoundQuiverAlgebra, text: str | None) -> list[np.ndarray]:
    if not text:
        return []
    return [parse_element(A, s) for s in text.split(";") if s.strip()]


# -- commands ----------------------------------------------------------------------

def cmd_construct(args, rep: Report) -> None:
    f = field_of(args)
    A, bundle = rep.timed("build", load_algebra, args.target, f, args.bound)
    res = rep.results
    res["dim"] = A.dim
    res["basis_by_length"] = A.dims_by_length()
    res["loewy_length"] = A.loewy_length
    res["vertices"] = len(A.quiver.vertices)
    res["arrows"] = len(A.quiver.arrows)
    rep.check("associative", rep.timed("associativity", A.is_associative))
    if bundle is not None:
        eps = bundle.eps
        nu = bundle.nakayama
        res["type"] = str(bundle.type)
        res["sigma"] = bundle.sigma.generator_images()
        if bundle.notes:
            res["notes"] = bundle.notes
    else:
        try:
            eps = find_frobenius_form(A, seed=args.seed)
        except AlgebraError as exc:
            res["frobenius"] = f"no Frobenius form found: {exc}"
            return
        nu = nakayama_automorphism(A, eps)
    _frobenius_section(A, eps, nu, rep)


def _frobenius_section(A: BoundQuiverAlgebra, eps: FrobeniusForm, nu: AlgebraMorphism, rep: Report) -> None:
    f = A.field
    res = rep.results
    sym = is_symmetric_form(A, eps)
    res["frobenius"] = "symmetric" if sym else "frobenius"
    res["nakayama"] = nu.generator_images()
    res["nakayama_is_identity"] = nu.is_identity()
    G = A.gram(eps.values)
    lhs = G
    rhs = f.matmul(nu.matrix.T, G.T)  # entry (i, j): eps(b_j nu(b_i))
    rep.check("nakayama identity eps(ab) = eps(b nu(a))", np.array_equal(lhs, rhs))
    if sym:
        rep.check("symmetric form has trivial Nakayama automorphism", nu.is_identity())
    rep.check("left socle = right socle", A.socle("left") == A.socle("right"))


def cmd_nakayama(args, rep: Report) -> None:
    f = field_of(args)
    A, bundle = rep.timed("build", load_algebra, args.target, f, args.bound)
    if bundle is not None:
        eps, nu = bundle.eps, bundle.nakayama
    else:
        eps = find_frobenius_form(A, seed=args.seed)
        nu = nakayama_automorphism(A, eps)
    _frobenius_section(A, eps, nu, rep)
    inner = is_inner(nu, seed=args.seed)
    rep.results["nakayama_inner"] = inner.kind
    if inner.kind == "inner":
        rep.results["inner_witness"] = A.format_element(inner.witness)


def cmd_scydim(args, rep: Report) -> None:
    if args.sweep:
        chars = [int(c) for c in args.chars.split(",")] if args.chars else [args.char]
        cells = rep.timed("sweep", sweep, args.target, parse_range(args.sweep), chars)
        rep.results["cells"] = [c.to_json() for c in cells]
        for c in cells:
            if c.result is not None:
                rep.check(f"recheck {c.type_text} p={c.char}", not c.audit, "; ".join(c.audit))
        return
    t = parse_type(args.target)
    res = scydim(t, args.char)
    rep.results.update({"type": str(t), "char": args.char, **res.to_json()})
    problems = recheck(t, res)
    rep.check("congruence witness is minimal and reproduces the value", not problems, "; ".join(problems))


def cmd_verify(args, rep: Report) -> None:
    f = field_of(args)
    t = parse_type(args.target)
    bundle = rep.timed("build", construct_family, t, f)
    res = rep.results
    res["type"] = str(t)
    res["dim"] = bundle.algebra.dim
    degrees = []

    def pattern_check(d: int, found: Counter) -> str:
        try:
            want = expected_resolution_term(t, d, bundle.sigma.vertex_permutation())
        except UnsupportedType:
            return "n/a"
        ok = want == found
        rep.check(f"cover pattern Q_{d}", ok, "" if ok else f"expected {sorted(want.items())}")
        return "match" if ok else "mismatch"

    def on_degree(r) -> None:
        entry = r.to_json(f, include_matrix=False)
        entry["pattern"] = pattern_check(r.degree, r.cover_pattern)
        period, sigma = bundle.period, bundle.sigma
        if t.family == "nonstd":
            n = t.index // 3
            # Omega^{2n-1} = A_sigma only for even n; Omega^{4n-2} = A always
            if n % 2 == 0:
                period = 2 * n - 1
            else:
                sigma = AlgebraMorphism.identity(bundle.algebra)
        if r.twist is not None and t.family in ("A2", "D2", "nonstd") and (r.degree + 1) % period == 0:
            k = (r.degree + 1) // period
            rel = r.twist.compose(sigma.power(-k))
            kind = is_inner(rel, seed=args.seed).kind
            entry["twist_vs_sigma_power"] = {"k": k, "inner": kind}
            rep.check(f"Omega^{r.degree + 1} twist equals sigma^{k} up to inner", kind != "not_inner", kind)
        degrees.append(entry)

    try:
        bf = rep.timed("bruteforce", bruteforce_scydim, bundle, args.max_degree, args.dim_cap, args.seed, on_degree)
    finally:
        res["degrees"] = degrees
    res["bruteforce"] = bf.summary()

    try:
        cl = scydim(t, f.characteristic)
        res["classifier"] = cl.to_json()
    except InadmissibleType:
        cl = None
        res["classifier"] = None
    res["adjudication"] = adjudicate(bf, cl, rep)

    if cl is not None and cl.finite and t.family == "A2" and cl.solution_l is not None and cl.solution_l % 2:
        try:
            a = witness_inner_element(bundle, cl.solution_l)
            res["inner_witness"] = {"l": cl.solution_l, "element": bundle.algebra.format_element(a)}
            rep.check(f"explicit witness conjugates to nu sigma^{cl.solution_l}", True)
        except AlgebraError as exc:
            rep.check(f"explicit witness conjugates to nu sigma^{cl.solution_l}", False, str(exc))


def adjudicate(bf, cl, rep: Report) -> str:
    """Compare brute force with the classifier; inconsistencies become failed audits."""
    refuted = [r.degree for r in bf.reports if r.verdict is not None and r.verdict.status.refuted]
    bf_text = f"Finite({bf.value})" if bf.value is not None else "none found"
    if cl is None:
        return f"brute force {bf_text} ({'proven' if bf.proven else 'upper bound'}); no table entry"
    if cl.finite:
        c = cl.value
        rep.check("classifier value is not refuted by the brute force", c not in refuted,
                  f"refuted degrees {refuted}")
        if bf.value is not None:
            ok = c == bf.value if bf.proven else c <= bf.value
            rep.check("brute force agrees with the classifier", ok, f"brute force {bf.value}, classifier {c}")
            if bf.proven:
                return f"agreement: Finite({c})"
            return f"consistent: classifier Finite({c}), brute force upper bound {bf.value}"
        depth = max((r.degree for r in bf.reports), default=-1)
        rep.check("classifier value is confirmed when within the searched range", c > depth,
                  f"searched through degree {depth}")
        return f"consistent: classifier Finite({c}) lies beyond the searched degree {depth}"
    rep.check("no confirmed degree for an infinite classifier value", bf.value is None, bf_text)
    return "agreement: Infinite (no degree confirmed)" if bf.value is None else "disagreement"


def cmd_stable_hom(args, rep: Report) -> None:
    f = field_of(args)
    A, _ = load_algebra(args.target, f, args.bound)
    I = RightIdeal(A, parse_generators(A, args.I))
    J = RightIdeal(A, parse_generators(A, args.J))
    rep.check("I is a right ideal", I.is_closed())
    rep.check("J is a right ideal", J.is_closed())
    sh = rep.timed("stable_hom", stable_hom_cyclic, A, I, J)
    rep.results.update({"dim_I": I.dim, "dim_J": J.dim, "stable_hom_dim": sh.dim,
                        "representatives": [A.format_element(x) for x in sh.representatives]})


def cmd_certify(args, rep: Report) -> None:
    f = field_of(args)
    A, _ = load_algebra(args.target, f, args.bound)
    try:
        phi = parse_map(A, args.map)
    except NotMultiplicative as exc:
        raise UsageError(f"map is not an algebra homomorphism: {exc}") from exc
    if not phi.is_automorphism():
        raise UsageError("map is not an automorphism")
    rep.check("map is a unital multiplicative bijection", True)
    v = rep.timed("certificate", stably_inner_certificate, phi, args.seed)
    rep.results.update({"map": phi.generator_images(), **v.to_json(f)})


COMMANDS = {
    "construct": cmd_construct,
    "scydim": cmd_scydim,
    "verify": cmd_verify,
    "stable-hom": cmd_stable_hom,
    "certify": cmd_certify,
    "nakayama": cmd_nakayama,
}


# -- rendering ---------------------------------------------------------------------

def _render_value(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def render_text(payload: dict, command: str) -> str:
    lines = []
    res = payload["results"]
    if command == "verify":
        lines.append(f"{res['type']} over {payload['field']}: dim {res['dim']}")
        for d in res.get("degrees", []):
            v = d["verdict"]["status"] if d["verdict"] else f"no twist ({d['note']})"
            lines.append(f"  m={d['degree']:>3}  dim Omega^{d['degree'] + 1}={d['syzygy_dim']:>6}  "
                         f"pattern {d['pattern']:<8}  {v}")
        for k in ("bruteforce", "classifier", "inner_witness", "adjudication"):
            if k in res:
                lines.append(f"{k}: {_render_value(res[k])}")
    elif command == "scydim" and "cells" in res:
        for c in res["cells"]:
            lines.append(f"{c['type']:<20} p={c['char']:<3} {c.get('result', 'error: ' + c.get('error', ''))}")
    else:
        for k, v in res.items():
            lines.append(f"{k}: {_render_value(v)}")
    failed = [a for a in payload["audit"] if not a["ok"]]
    lines.append(f"audit: {len(payload['audit']) - len(failed)}/{len(payload['audit'])} passed")
    for a in failed:
        lines.append(f"  FAILED {a['check']}: {a['detail']}")
    return "\n".join(lines)


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", "--char", dest="char", type=int, default=2,
                        help="field characteristic, 0 for the rationals (default 2)")
    common.add_argument("--json", action="store_true", help="print the JSON run report")
    common.add_argument("--stable-output", action="store_true", help="omit timings so output is reproducible")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--dim-cap", type=int, default=20000)
    common.add_argument("--max-degree", type=int, default=8)
    common.add_argument("--bound", type=int, default=None, help="path length bound for algebra files")

    p = argparse.ArgumentParser(prog="stablecy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("construct", "nakayama", "verify"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("target", help="type shorthand (A5:r=2:t=2, D6:nonstd, trunc:4) or algebra file")
    sp = sub.add_parser("scydim", parents=[common])
    sp.add_argument("target", help="type shorthand, or a pattern like 'A{2*n+1}:r={r}:t=2' with --sweep")
    sp.add_argument("--sweep", help="parameter ranges, e.g. n=1..4,r=1..6")
    sp.add_argument("--chars", help="comma separated characteristics for a sweep")
    sp = sub.add_parser("stable-hom", parents=[common])
    sp.add_argument("target")
    sp.add_argument("--I", dest="I", default="", help="generators of I separated by ';'")
    sp.add_argument("--J", dest="J", default="", help="generators of J separated by ';'")
    sp = sub.add_parser("certify", parents=[common])
    sp.add_argument("target")
    sp.add_argument("--map", required=True, help="generator images, e.g. 't -> t + t^3'")
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    rep = Report(argv, args)
    code = EXIT_OK
    try:
        COMMANDS[args.command](args, rep)
    except ResourceLimit as exc:
        rep.results["error"] = f"resource limit: {exc}"
        rep.results["degree_reached"] = exc.degree
        code = EXIT_RESOURCE
    except BoundTooSmall as exc:
        rep.results["error"] = f"{exc}; retry with --bound {2 * exc.bound}"
        code = EXIT_USAGE
    except ParseError as exc:
        rep.results["error"] = f"parse error: {exc}"
        code = EXIT_USAGE
    except (UsageError, AlgebraError, ValueError) as exc:
        rep.results["error"] = str(exc)
        code = EXIT_USAGE
    if code == EXIT_OK and rep.failed:
        code = EXIT_AUDIT
    payload = rep.payload()
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(render_text(payload, args.command))
    return code


if __name__ == "__main__":
    sys.exit(main())
