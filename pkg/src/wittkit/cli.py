"""Command-line front end: parse field and form expressions, dispatch the
library operations, and emit either a human summary or a machine-readable
JSON report.

Verbs: decide, invariants, group, cert, lambda, construct, verify,
selftest.  Mathematical negatives (not hyperbolic, not a member, no
certificate within bounds, undecidable at this layer) are successful runs
with a status field and exit code 0; parse failures and violated
preconditions exit 2.
"""

import argparse
import json
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .errors import ParseError, WittkitError
from .fields import (
    QQ,
    FieldTower,
    PrimeField,
    RationalFunction,
    Rationals,
    SquareClass,
    canonical_square_class,
    one_class,
)
from .forms import discriminant, in_In, orthogonal_sum, pfister, quadform, scale
from . import constructions, groups, henselian, localglobal

SCHEMA = "wittkit/1"

# outcomes that are honest mathematical answers rather than malfunctions
_NEGATIVE_CODES = {
    "NotASimilarityFactor",
    "NotTorsion",
    "CertificateSearchExhausted",
    "DecompositionNotFound",
    "DepthLimitExceeded",
    "UndecidableLayer",
}


# ---------------------------------------------------------------------------
# expression parsing


def parse_field(spec):
    """Field tower from a spec like Q, F7, Q(s), Q[[t1]][[t2]]."""
    s = spec.strip()
    if not s:
        raise ParseError("field spec at position 0: empty")
    if s.startswith("Q("):
        end = s.find(")")
        if end < 0:
            raise ParseError("field spec at position 1: unclosed base variable")
        var = s[2:end].strip()
        if not var.isidentifier():
            raise ParseError("field spec at position 2: bad base variable %r" % var)
        base, rest, offset = RationalFunction(var), s[end + 1:], end + 1
    elif s.startswith("F"):
        m = re.match(r"F(\d+)", s)
        if not m:
            raise ParseError("field spec at position 1: expected a prime after F")
        base, rest, offset = PrimeField(int(m.group(1))), s[m.end():], m.end()
    elif s.startswith("Q"):
        base, rest, offset = Rationals(), s[1:], 1
    else:
        raise ParseError("field spec at position 0: base must be Q, Fp or Q(var)")
    steps = []
    while rest:
        m = re.match(r"\[\[(\w+)\]\]", rest)
        if not m:
            raise ParseError("field spec at position %d: expected [[name]], got %r"
                             % (offset, rest))
        steps.append(m.group(1))
        offset += m.end()
        rest = rest[m.end():]
    return FieldTower(base, tuple(steps))


def _split_top(text, sep, offset):
    """Split on a separator outside parentheses, keeping source offsets."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("at position %d: unbalanced ')'" % (offset + i))
        elif ch == sep and depth == 0:
            parts.append((text[start:i], offset + start))
            start = i + 1
    if depth:
        raise ParseError("at position %d: unbalanced '('" % (offset + len(text)))
    parts.append((text[start:], offset + start))
    return parts


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_class(text, field, offset=0):
    """Square class from a product expression: factors are rationals, tower
    variables, or base-field polynomials like (s^2+8)."""
    base = field.base_only()
    coeff_cls = one_class(base)
    exps = [0] * field.n_steps
    steps = {name: i for i, name in enumerate(field.steps)}
    for raw, pos in _split_top(text, "*", offset):
        factor = raw.strip()
        if not factor:
            raise ParseError("at position %d: empty factor" % pos)
        neg = False
        while factor.startswith("-") and not _RATIONAL.match(factor):
            neg = not neg
            factor = factor[1:].strip()
        if factor in steps:
            exps[steps[factor]] += 1
        elif _RATIONAL.match(factor):
            coeff_cls = coeff_cls.times(canonical_square_class(Fraction(factor), base))
        else:
            if factor.startswith("(") and factor.endswith(")"):
                factor = factor[1:-1].strip()
            if not factor:
                raise ParseError("at position %d: empty factor" % pos)
            try:
                coeff_cls = coeff_cls.times(canonical_square_class(factor, base))
            except WittkitError as exc:
                raise ParseError("at position %d: bad factor %r (%s)"
                                 % (pos, raw.strip(), exc)) from None
        if neg:
            coeff_cls = coeff_cls.neg()
    return SquareClass(field, coeff_cls.coeff, tuple(e % 2 for e in exps))


def parse_form(spec, field):
    """Quadratic form from <a,b,...> or pfi(s1,...,sn)."""
    s = spec.strip()
    if s.startswith("<") and s.endswith(">"):
        inner = s[1:-1]
        if not inner.strip():
            return quadform(field, [])
        classes = [parse_class(text, field, pos)
                   for text, pos in _split_top(inner, ",", 1)]
        return quadform(field, classes)
    if s.startswith("pfi(") and s.endswith(")"):
        inner = s[4:-1]
        if not inner.strip():
            return pfister(field, [])
        slots = [parse_class(text, field, pos)
                 for text, pos in _split_top(inner, ",", 4)]
        return pfister(field, slots)
    raise ParseError("form spec at position 0: expected <...> or pfi(...), got %r" % s)


def _parse_class_list(spec, field):
    if not spec.strip():
        return []
    return [parse_class(text, field, pos) for text, pos in _split_top(spec, ",", 0)]


# ---------------------------------------------------------------------------
# certificate payload round-trip


def _coords_from_payload(node, field):
    if isinstance(node, list):
        return tuple(_coords_from_payload(c, field) for c in node)
    text = str(node)
    if _RATIONAL.match(text.strip()):
        return Fraction(text)
    return parse_class(text, field)


def certificate_from_payload(payload):
    """Rebuild a splitting certificate from its printed JSON payload."""
    field = parse_field(payload["field"])
    target = parse_class(payload["target"], field)
    parts = []
    for p in payload.get("parts", []):
        roots = tuple(parse_class(r, field) for r in p.get("tower", []))
        tower = groups.TwoExtensionTower(field, roots)
        element = _coords_from_payload(p.get("element"), field)
        att_payload = p.get("attestation", {"kind": "decided", "parts": []})
        if att_payload.get("kind") == "symbolic":
            att_parts = tuple(
                (tuple(parse_class(e, field) for e in item["entries"]),
                 tuple(int(b) for b in item["mask"]))
                for item in att_payload.get("parts", []))
            attestation = groups.HypAttestation("symbolic", att_parts)
        else:
            attestation = groups.DECIDED
        parts.append(groups.NormPart(tower, element, attestation))
    return groups.HypCertificate(field, target, tuple(parts),
                                 note=payload.get("note", ""))


# ---------------------------------------------------------------------------
# report plumbing


def _report(command_echo, status, result=None, certificates=(), cited=(),
            diagnostics=(), elapsed_ms=0):
    return {
        "schema": SCHEMA,
        "command": command_echo,
        "status": status,
        "result": result if result is not None else {},
        "certificates": list(certificates),
        "citedAssumptions": list(cited),
        "diagnostics": list(diagnostics),
        "elapsed_ms": elapsed_ms,
    }


def _certificate_item(cert, phi):
    return {
        "payload": cert.describe(),
        "field": str(phi.field),
        "form": [str(e) for e in phi.entries],
    }


def _emit_verified(cert, phi):
    """Verify before printing; a certificate that fails its own verifier is
    a malfunction, not a result."""
    check = groups.verify_certificate(cert, phi)
    if not check:
        raise WittkitError("emitted certificate failed verification: %s"
                           % "; ".join(check.diagnostics))
    return _certificate_item(cert, phi)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--seed", type=int, default=None, help="seed echoed into the report")
    common.add_argument("--bound", type=int, default=None,
                        help="search bound override (also via WITTKIT_SEARCH_BOUND)")
    common.add_argument("--field", default="Q", help="field spec, e.g. Q, F7, Q(s), Q[[t1]]")

    parser = _Parser(prog="wittkit", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("decide", parents=[common], help="decide a form property")
    p.add_argument("property", nargs="?", default="hyperbolic",
                   choices=["hyperbolic", "witt", "anisotropic-dim"])
    p.add_argument("--form", required=True)

    p = sub.add_parser("invariants", parents=[common], help="classifying invariants")
    p.add_argument("--form", required=True)

    p = sub.add_parser("group", parents=[common], help="similarity factor tests")
    p.add_argument("action", nargs="?", default="test-g", choices=["test-g"])
    p.add_argument("--a", required=True)
    p.add_argument("--form", required=True)

    p = sub.add_parser("cert", parents=[common], help="emit a splitting certificate")
    p.add_argument("route", choices=["pfister", "two-pfister", "height2",
                                     "torsion", "in-g-h", "odd"])
    p.add_argument("--a", default=None)
    p.add_argument("--form", default=None)
    p.add_argument("--pi", default=None)
    p.add_argument("--rho", default=None)
    p.add_argument("--scalars", default=None, help="c1,c2 for the two-piece route")

    p = sub.add_parser("lambda", parents=[common], help="norm-intersection query")
    p.add_argument("--roots", default=None, help="comma-separated square roots")
    p.add_argument("--d", default=None)
    p.add_argument("--sivatski", default=None,
                   help="a1,a2,d: query the generated function-field instance")

    p = sub.add_parser("construct", parents=[common], help="build a registry example")
    p.add_argument("name")
    p.add_argument("--recheck", action="store_true")

    p = sub.add_parser("verify", parents=[common], help="re-verify a printed certificate")
    p.add_argument("--certificate", required=True,
                   help="path to a JSON payload, or - for standard input")
    p.add_argument("--form", default=None)

    p = sub.add_parser("selftest", parents=[common], help="run the built-in battery")
    p.add_argument("--parallel", action="store_true")
    return parser


def parse_command(argv):
    return build_parser().parse_args(list(argv))


# ---------------------------------------------------------------------------
# verb handlers; each returns (status, result, certificates, cited, diagnostics)


def _run_decide(args):
    field = parse_field(args.field)
    phi = parse_form(args.form, field)
    if args.property == "hyperbolic":
        verdict = henselian.is_hyperbolic_tower(phi) if phi.dim else True
        return ("hyperbolic" if verdict else "not-hyperbolic",
                {"hyperbolic": verdict}, (), (), ())
    index = henselian.witt_index_tower(phi) if phi.dim else 0
    if args.property == "witt":
        return "ok", {"witt_index": index}, (), (), ()
    return "ok", {"dim_anisotropic": phi.dim - 2 * index}, (), (), ()


def _run_invariants(args):
    field = parse_field(args.field)
    phi = parse_form(args.form, field)
    result = {
        "dim": phi.dim,
        "disc": str(discriminant(phi)),
        "in_I": {str(n): in_In(phi, n) for n in (1, 2, 3)},
    }
    if isinstance(field.base, Rationals) and not field.steps:
        inv = localglobal.local_invariants(phi)
        result["hasse"] = {str(p): v for p, v in sorted(inv.hasse.items(),
                                                        key=lambda kv: str(kv[0]))}
        result["signatures"] = {str(k): v for k, v in inv.signatures.items()}
    return "ok", result, (), (), ()


def _run_group(args):
    field = parse_field(args.field)
    phi = parse_form(args.form, field)
    a = parse_class(args.a, field)
    member = groups.in_G(a, phi) if phi.dim else True
    certificates = []
    if member:
        try:
            cert = groups.pfister_hyp_certificate(a, phi)
            certificates.append(_emit_verified(cert, phi))
        except WittkitError:
            pass
    return ("member" if member else "non-member",
            {"a": str(a), "member": member}, certificates, (), ())


def _require(args, name):
    value = getattr(args, name.strip("-").replace("-", "_"))
    if value is None:
        raise ParseError("the %s route needs %s" % (args.route, name))
    return value


def _run_cert(args):
    field = parse_field(args.field)
    route = args.route
    if route == "two-pfister":
        pi = parse_form(_require(args, "--pi"), field)
        rho = parse_form(_require(args, "--rho"), field)
        a = parse_class(_require(args, "--a"), field)
        scalars = None
        if args.scalars:
            parsed = _parse_class_list(args.scalars, field)
            if len(parsed) != 2:
                raise ParseError("--scalars wants exactly two entries")
            scalars = tuple(Fraction(c.coeff) for c in parsed)
        cert = groups.two_pfister_certificate(a, pi, rho, scalars=scalars)
        c1, c2 = scalars if scalars else (1, 1)
        phi = orthogonal_sum(scale(c1, pi), scale(c2, rho))
        return "certified", {"target": str(a)}, [_emit_verified(cert, phi)], (), ()

    phi = parse_form(_require(args, "--form"), field)
    if route == "odd":
        a = parse_class(args.a, field) if args.a else None
        cert = henselian.odd_simfactor_certificate(phi, a)
        if not cert:
            return "none-found", {"reason": cert.reason}, (), (), ()
        return "certified", {"target": str(cert.target)}, [_emit_verified(cert, phi)], (), ()
    a = parse_class(_require(args, "--a"), field)
    emit = {
        "pfister": groups.pfister_hyp_certificate,
        "height2": groups.height2_certificate,
        "torsion": groups.torsion_hyp_certificate,
        "in-g-h": groups.in_G_H_certificate,
    }[route]
    cert = emit(a, phi)
    return "certified", {"target": str(a)}, [_emit_verified(cert, phi)], (), ()


def _run_lambda(args):
    if args.sivatski:
        from .functionfield import sivatski_generate

        pieces = [p.strip() for p in args.sivatski.split(",")]
        if len(pieces) != 3:
            raise ParseError("--sivatski wants a1,a2,d")
        inst = sivatski_generate(*(Fraction(p) for p in pieces))
        report = groups.lambda_query(list(inst.roots), inst.d, instance=inst)
    else:
        field = parse_field(args.field)
        roots = _parse_class_list(_require_flag(args.roots, "--roots"), field)
        d = parse_class(_require_flag(args.d, "--d"), field)
        report = groups.lambda_query(roots, d, field)
    cited = [report.cited.describe()] if report.cited else []
    return report.status, report.describe(), (), cited, ()


def _require_flag(value, name):
    if value is None:
        raise ParseError("missing %s" % name)
    return value


def _run_construct(args):
    bundle = constructions.paper_example(args.name)
    result = bundle.describe()
    if args.recheck:
        result["recheck"] = bundle.recheck()
    cited = [c.describe() if hasattr(c, "describe") else str(c) for c in bundle.cited]
    return "ok", result, (), cited, ()


def _run_verify(args):
    if args.certificate == "-":
        payload = json.load(sys.stdin)
    else:
        with open(args.certificate) as handle:
            payload = json.load(handle)
    if "payload" in payload:
        item = payload
        payload = item["payload"]
        form_spec = args.form or "<%s>" % ",".join(item.get("form", []))
        field = parse_field(item.get("field", args.field))
    else:
        form_spec = _require_flag(args.form, "--form")
        field = parse_field(args.field)
    cert = certificate_from_payload(payload)
    phi = parse_form(form_spec, field)
    check = groups.verify_certificate(cert, phi)
    return ("valid" if check.ok else "invalid",
            {"ok": check.ok}, (), (), list(check.diagnostics))


def _selftest_battery():
    def product_formula():
        pairs = [(2, 3), (-1, 7), (5, -14), (30, 77)]
        for a, b in pairs:
            symbols = [localglobal.hilbert_symbol(a, b, p)
                       for p in localglobal.places_Q([a, b])]
            product = 1
            for s in symbols:
                product *= s
            if product != 1:
                return False
        return True

    def pfister_roundtrip():
        pi = pfister(QQ, [-1, 7])
        cert = groups.pfister_hyp_certificate(2, pi)
        return bool(groups.verify_certificate(cert, pi))

    def fork_ledger():
        bundle = constructions.paper_example("fork3")
        return (bundle.rho.dim == 14
                and bundle.claim("witt identity (negated slots)").value is True)

    def laurent_recursion():
        field = FieldTower(Rationals(), ("t",))
        split = quadform(field, [1, -1])
        doubled = parse_form("<1,-2,t,-2*t>", field)
        return (henselian.is_hyperbolic_tower(split)
                and not henselian.is_hyperbolic_tower(doubled))

    def biquadratic_norms():
        report = groups.lambda_query([2, 3], -2, QQ)
        return report.status == "FullNormWitnessFound"

    def prime_tower():
        field = FieldTower(PrimeField(7), ("t",))
        return henselian.is_hyperbolic_tower(quadform(field, [1, 3]))

    return [
        ("hilbert product formula", product_formula),
        ("pfister certificate round-trip", pfister_roundtrip),
        ("fork ledger", fork_ledger),
        ("laurent residue recursion", laurent_recursion),
        ("biquadratic norm search", biquadratic_norms),
        ("prime field tower", prime_tower),
    ]


def _run_selftest(args):
    battery = _selftest_battery()
    if getattr(args, "parallel", False):
        with ThreadPoolExecutor(max_workers=4) as pool:
            futures = [(name, pool.submit(check)) for name, check in battery]
            outcomes = [(name, fut.result()) for name, fut in futures]
    else:
        outcomes = [(name, check()) for name, check in battery]
    checks = [{"name": name, "ok": bool(ok)} for name, ok in outcomes]
    ok = all(c["ok"] for c in checks)
    return ("ok" if ok else "failed"), {"checks": checks}, (), (), ()


_HANDLERS = {
    "decide": _run_decide,
    "invariants": _run_invariants,
    "group": _run_group,
    "cert": _run_cert,
    "lambda": _run_lambda,
    "construct": _run_construct,
    "verify": _run_verify,
    "selftest": _run_selftest,
}


def run(args, argv):
    """Execute a parsed command; returns (report dict, exit code)."""
    echo = {"verb": args.verb, "argv": list(argv)}
    if getattr(args, "seed", None) is not None:
        echo["seed"] = args.seed
    if getattr(args, "bound", None) is not None:
        os.environ["WITTKIT_SEARCH_BOUND"] = str(args.bound)
        echo["bound"] = args.bound
    started = time.monotonic()
    try:
        status, result, certificates, cited, diagnostics = _HANDLERS[args.verb](args)
        code = 0
    except WittkitError as exc:
        code_name = getattr(exc, "code", type(exc).__name__)
        status, result = code_name, {"message": str(exc)}
        certificates, cited, diagnostics = (), (), [str(exc)]
        code = 0 if code_name in _NEGATIVE_CODES else 2
    elapsed_ms = int((time.monotonic() - started) * 1000)
    report = _report(echo, status, result, certificates, cited, diagnostics, elapsed_ms)
    if status == "failed" and args.verb == "selftest":
        code = 2
    return report, code


def _human_lines(report):
    yield "status: %s" % report["status"]
    for key, value in report["result"].items():
        yield "%s: %s" % (key, json.dumps(value, sort_keys=True, default=str)
                          if isinstance(value, (dict, list)) else value)
    for item in report["certificates"]:
        yield "certificate: %s" % json.dumps(item, sort_keys=True)
    for item in report["citedAssumptions"]:
        yield "cited: %s" % json.dumps(item, sort_keys=True)
    for item in report["diagnostics"]:
        yield "diagnostic: %s" % item


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_command(argv)
    except ParseError as exc:
        payload = _report({"argv": argv}, "ParseError",
                          {"message": str(exc)}, diagnostics=[str(exc)])
        if "--json" in argv:
            print(json.dumps(payload, sort_keys=True))
        else:
            print("parse error: %s" % exc, file=sys.stderr)
        return 2
    try:
        report, code = run(args, argv)
    except json.JSONDecodeError as exc:
        report = _report({"verb": args.verb, "argv": argv}, "ParseError",
                         {"message": str(exc)}, diagnostics=[str(exc)])
        code = 2
    except OSError as exc:
        report = _report({"verb": args.verb, "argv": argv}, "IOError",
                         {"message": str(exc)}, diagnostics=[str(exc)])
        code = 2
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        for line in _human_lines(report):
            print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
