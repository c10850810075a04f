"""
flopcalc: checks for local models of split ordinary P^r flops.

    flopcalc defect --fixture SF1
    flopcalc extremal --fixture SP2 --nu 1
    flopcalc all --fixture SF1 --json

Each check writes a report {check, fixture, window, pass, details}.  Exit
status: 0 when every check passes, 1 on a failed check, 2 on bad input.

Fixture degree conventions: a line bundle O(k) on P^1 is the vector [k];
on a product of projective spaces it lists one degree per factor.
"""

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .cohring import build_base
from .flopmodel import CurveClass, FlopModel
from .ifunc import TruncationWindow

CHECKS = ["defect", "extremal", "ifun", "pf-check", "bf", "qlh", "invariance"]

# (base, r, F degrees, F' degrees); base is ("point",) or ("projspace", n)
FIXTURES = {
    "SF1": (("point",), 1, [[], []], [[], []]),
    "SF2": (("point",), 2, [[], [], []], [[], [], []]),
    "SF3": (("point",), 3, [[]] * 4, [[]] * 4),
    "SP1-pos": (("projspace", 1), 1, [[1], [0]], [[1], [0]]),
    "SP1-neg": (("projspace", 1), 1, [[-1], [-1]], [[0], [0]]),
    "SP2": (("projspace", 1), 2, [[1], [0], [-1]], [[0], [0], [-1]]),
    "SQ2": (("projspace", 2), 2, [[1], [0], [-1]], [[2], [0], [1]]),
}

DEFAULT_WINDOWS = {
    "ifun": (2, 3, 3),
    "pf-check": (2, 3, 3),
    "bf": (2, 3, 3),
    "qlh": (2, 3, 3),
    "invariance": (2, 6, 4),
}

POINT_INVARIANCE_WINDOW = (0, 8, 2)


class ConfigError(Exception):
    pass


def make_model(base_spec, r, F, Fp):
    kind = base_spec[0]
    if kind == "point":
        base = build_base("point")
    elif kind == "projspace":
        base = build_base("projspace", n=base_spec[1])
    elif kind == "product":
        base = build_base("product", factors=list(base_spec[1]))
    else:
        raise ConfigError("unknown base %r" % (kind,))
    if len(F) != r + 1 or len(Fp) != r + 1:
        raise ConfigError("F and F' need r+1 = %d degree vectors" % (r + 1))
    for v in list(F) + list(Fp):
        if len(v) != base.n_mori:
            raise ConfigError("degree vectors need %d entries" % base.n_mori)
    to_div = (lambda v: base.divisor(v)) if base.n_mori else (lambda v: base.zero())
    return FlopModel(base, r, [to_div(v) for v in F], [to_div(v) for v in Fp])


def fixture_model(name):
    if name not in FIXTURES:
        raise ConfigError("unknown fixture %r (known: %s)" % (name, ", ".join(sorted(FIXTURES))))
    return make_model(*FIXTURES[name])


def _check_ints(x, path="config"):
    if isinstance(x, bool) or isinstance(x, float):
        raise ConfigError("%s: only integers are allowed" % path)
    if isinstance(x, dict):
        for k, v in x.items():
            _check_ints(v, "%s.%s" % (path, k))
    elif isinstance(x, list):
        for i, v in enumerate(x):
            _check_ints(v, "%s[%d]" % (path, i))


def load_config(path):
    """Parse a JSON config; returns (model, name, window or None, checks or None, output)."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("cannot read config: %s" % exc)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    _check_ints(data)
    base = data.get("base", "point")
    if base == "point":
        spec = ("point",)
    elif isinstance(base, dict) and "projspace" in base:
        spec = ("projspace", base["projspace"])
    elif isinstance(base, dict) and "product" in base:
        spec = ("product", base["product"])
    else:
        raise ConfigError("base must be \"point\", {\"projspace\": n} or {\"product\": [..]}")
    if not isinstance(data.get("r"), int):
        raise ConfigError("r must be an integer")
    F = data.get("F_degrees")
    Fp = data.get("Fp_degrees")
    if not isinstance(F, list) or not isinstance(Fp, list):
        raise ConfigError("F_degrees and Fp_degrees must be lists")
    try:
        model = make_model(spec, data["r"], F, Fp)
    except ValueError as exc:
        raise ConfigError(str(exc))
    window = data.get("window")
    if window is not None:
        window = _window(window)
    checks = data.get("checks")
    if checks is not None:
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            raise ConfigError("unknown checks: %s" % ", ".join(map(str, bad)))
    return model, data.get("name", Path(path).stem), window, checks, data.get("output")


def _window(w):
    if isinstance(w, str):
        try:
            w = [int(x) for x in w.split(",")]
        except ValueError:
            raise ConfigError("window must be B,D,D2 with integers")
    if len(w) != 3:
        raise ConfigError("window must have three bounds")
    try:
        return TruncationWindow(*w)
    except ValueError as exc:
        raise ConfigError(str(exc))


# JSON conversion


def jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, CurveClass):
        return x.key()
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    return str(x)


# checks


def run_defect(model, window, opts):
    from .defect import defect_check, p1_corollary_check, pairing_check
    pairing = pairing_check(model)
    defect = defect_check(model, ordered=True)
    details = {"pairing": pairing, "defect": {"count": defect["count"], "pass": defect["pass"],
                                              "failures": [t for t in defect["triples"] if not t["pass"]]}}
    ok = pairing["pass"] and defect["pass"]
    if model.r == 1 and model.base.n_mori:
        cor = p1_corollary_check(model)
        details["p1_corollary"] = {"count": cor["count"], "pass": cor["pass"]}
        ok = ok and cor["pass"]
    return ok, details


def run_extremal(model, window, opts):
    from .extremal import (FPoly, W_recursive, continue_f, delta_series, expand_f_series,
                           functional_equation_check, mu1_coefficients, two_point_series)
    r = model.r
    nus = [opts.nu] if opts.nu is not None else list(range(r))
    if any(not 0 <= nu <= r - 1 for nu in nus):
        raise ConfigError("nu must satisfy 0 <= nu <= r-1")
    details = {"functional_equation": {}}
    ok = True
    for nu in nus:
        rep = functional_equation_check(model, nu)
        details["functional_equation"][str(nu)] = rep
        ok = ok and rep["pass"]
    f = FPoly.f(r)
    cont = f + continue_f(f)
    details["f_continuation"] = cont == FPoly.constant(Fraction((-1) ** r), r)
    two = delta_series(two_point_series(r, 10)) == expand_f_series(f, 10)
    details["two_point"] = two
    ok = ok and details["f_continuation"] and two
    if r >= 2:
        W1 = expand_f_series(W_recursive(model, 1), 10)
        mu1 = W1 == mu1_coefficients(model, 10)
        details["W1_series"] = mu1
        ok = ok and mu1
    return ok, details


def run_ifun(model, window, opts):
    from .ifunc import assemble_I, homogeneity_defects, vanishing_defects
    I = assemble_I(model, window)
    hom = homogeneity_defects(model, I)
    van = vanishing_defects(model, window)
    details = {"terms": len(I.terms), "homogeneity_defects": hom, "vanishing_defects": van}
    if opts.dump:
        details["I"] = I.dump()
    return not hom and not van, details


def run_pf(model, window, opts):
    from .ifunc import IFunction
    from .pfops import check_annihilation, ideal_identities, picard_fuchs_ops
    box_l, box_g, box_lp, box_gp = picard_fuchs_ops(model)
    I, Ip = IFunction(model), IFunction(model.primed)
    reps = {"box_l": check_annihilation(box_l, I, window),
            "box_gamma": check_annihilation(box_g, I, window),
            "box_l_primed": check_annihilation(box_lp, Ip, window),
            "box_gamma_primed": check_annihilation(box_gp, Ip, window)}
    ideal = ideal_identities(model)
    details = {k: {"pass": v["pass"], "interior_classes": v["interior_classes"],
                   "nonzero_interior": v["nonzero_interior"]} for k, v in reps.items()}
    details["ideal_identities"] = ideal
    return all(v["pass"] for v in reps.values()) and ideal["pass"], details


def run_bf(model, window, opts):
    from .birkhoff import birkhoff_factorize, check_factorization, tau_violations
    from .pfops import DiffOp, generators
    res = birkhoff_factorize(model, window)
    bad = check_factorization(model, res, window)
    viol = tau_violations(model, res)
    det = all(birkhoff_factorize(model, window, order_seed=s).P == res.P for s in (1, 2))
    trivial = res.P == DiffOp.identity(generators(model))
    details = {"P": res.P.pretty(), "P_is_identity": trivial, "steps": res.steps,
               "tau": {str(b): str(v) for b, v in sorted(res.tau.items(), key=lambda x: x[0].key())},
               "nonnegative_residue": bad, "tau_violations": viol, "deterministic": det}
    return not bad and not viol and det, details


def run_qlh(model, window, opts):
    from .birkhoff import birkhoff_factorize
    from .qlh import (ConnectionMatrix, birkhoff_column_check, build_connection,
                      check_gauge, commutators, connection_from_I, flatness_check,
                      gauge_reduce, transpose, weight_degree_audit, z_constant_mod_gamma)
    C, info = build_connection(model, window)
    flat = flatness_check(model, C, window)
    flat_t = flatness_check(model, {a: transpose(M) for a, M in C.items()}, window, "left")
    zconst = {str(a): [b for b in z_constant_mod_gamma(model, C[a]) if not any(b[:-2])]
              for a in C}
    G = gauge_reduce(model, C, window)
    audit = weight_degree_audit(model, G)
    ident = ConnectionMatrix.identity(model, window)
    _, Psi = connection_from_I(model, window) if opts.cross_check else (None, None)
    details = {
        "lift": info["lift"], "rewrite_steps": info["steps"],
        "non_effective_terms": info["non_effective"],
        "flatness": flat["pairs"],
        "flatness_transposed": flat_t["pairs"],
        "z_dependence_mod_gamma_at_betaS_0": zconst,
        "gauge_residual": G.residual, "gauge_equation_failures": check_gauge(model, C, G),
        "Ct_z_free": all(M.is_z_free() for M in G.Ct.values()),
        "Ct_unit_is_identity": G.Ct[0] == ident,
        "Ct_commute": commutators(model, G.Ct),
        "degree_audit": audit,
        "B_is_identity": G.B == ident,
    }
    ok = (flat["pass"] and flat_t["pass"] and not info["non_effective"] and not any(zconst.values())
          and not G.residual and not details["gauge_equation_failures"]
          and details["Ct_z_free"] and details["Ct_unit_is_identity"]
          and all(details["Ct_commute"].values()) and audit["bound_ok"])
    if Psi is not None:
        gmt = birkhoff_factorize(model, window)
        diff = birkhoff_column_check(model, Psi, G, gmt)
        details["birkhoff_column_mismatch"] = diff
        ok = ok and not diff
    return ok, details


def run_invariance(model, window, opts):
    from .qlh import invariance_check
    rep = invariance_check(model, window, betaS_max=2, d2_max=2)
    return rep["pass"], rep


RUNNERS = {"defect": run_defect, "extremal": run_extremal, "ifun": run_ifun,
           "pf-check": run_pf, "bf": run_bf, "qlh": run_qlh, "invariance": run_invariance}

NEEDS_WINDOW = {"ifun", "pf-check", "bf", "qlh", "invariance"}


def default_window(check, model):
    if check == "invariance" and not model.base.n_mori:
        return TruncationWindow(*POINT_INVARIANCE_WINDOW)
    return TruncationWindow(*DEFAULT_WINDOWS[check])


def run_check(check, model, fixture, window, opts):
    win = None
    if check in NEEDS_WINDOW:
        win = window or default_window(check, model)
    try:
        ok, details = RUNNERS[check](model, win, opts)
    except NotImplementedError as exc:
        ok, details = False, {"unsupported": str(exc)}
    return {"check": check, "fixture": fixture, "window": win.as_list() if win else None,
            "pass": bool(ok), "details": jsonable(details)}


def build_parser():
    p = argparse.ArgumentParser(prog="flopcalc", description=__doc__.split("\n\n")[0].strip())
    sub = p.add_subparsers(dest="command", required=True)
    for name in CHECKS + ["all", "fixtures"]:
        sp = sub.add_parser(name)
        if name == "fixtures":
            continue
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--fixture", help="built-in fixture name")
        src.add_argument("--config", help="JSON config path")
        sp.add_argument("--window", help="B,D,D2 truncation bounds")
        sp.add_argument("--nu", type=int, help="codimension for the extremal check")
        sp.add_argument("--out", help="write the JSON report here")
        sp.add_argument("--json", action="store_true", help="print the JSON report")
        sp.add_argument("--dump", action="store_true", help="include truncated series in reports")
        sp.add_argument("--no-cross-check", dest="cross_check", action="store_false",
                        help="skip the I-function cross-checks of the qlh check")
    return p


def main(argv=None):
    parser = build_parser()
    opts = parser.parse_args(argv)
    if opts.command == "fixtures":
        for name in sorted(FIXTURES):
            base, r, F, Fp = FIXTURES[name]
            print("%-8s base=%s r=%d F=%s F'=%s" % (name, "".join(map(str, base)), r, F, Fp))
        return 0
    try:
        if opts.config:
            model, name, cwin, cchecks, cout = load_config(opts.config)
        else:
            model, name, cwin, cchecks, cout = fixture_model(opts.fixture), opts.fixture, None, None, None
        window = _window(opts.window) if opts.window else cwin
        checks = (cchecks or CHECKS) if opts.command == "all" else [opts.command]
        reports = [run_check(c, model, name, window, opts) for c in checks]
    except ConfigError as exc:
        print("flopcalc: error: %s" % exc, file=sys.stderr)
        return 2
    payload = reports[0] if len(reports) == 1 else {"fixture": name, "reports": reports,
                                                     "pass": all(r["pass"] for r in reports)}
    text = json.dumps(payload, sort_keys=True, indent=2)
    out = opts.out or cout
    if out:
        Path(out).write_text(text + "\n")
    if opts.json:
        print(text)
    else:
        for rep in reports:
            print("%-10s %-8s %s" % (rep["check"], rep["fixture"], "PASS" if rep["pass"] else "FAIL"))
    return 0 if all(r["pass"] for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
