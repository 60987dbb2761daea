"""Command line front end: claim suites, covolume/index tables, ball export."""
from __future__ import annotations

import argparse
import json
import logging
import math
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import __version__
from .building import ball, neighbor_count, neighbors, origin
from .calg import (AlgElem, context, det_h_formula, h_alg, h_elements, in_gamma, psi,
                   psi_projective, series_det)
from .errors import (ConfigError, FieldTooLarge, NoRoot, PrecisionExhausted, SearchExhausted,
                     SingerError, SizeCapExceeded)
from .gfield import MAX_ORDER, exhaustive_checks, field_params, is_prime, prime_factors
from .lattgrp import (WORD_BOUND, certify_lattices, cocompactness_report, covolume,
                      covolume_comparison, elem_key, localize, p_element_escape,
                      panel_transitivity_check, psl_intersection_report, schreier_orbit,
                      standard_unipotent)
from .pgeom import (gaussian_binomial, hyperplanes, normalizer_singer, points, singer_pgl,
                    verify_simple_transitivity)
from .series import Series, series_norm

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
GRID = ((3, 2), (3, 3), (3, 4), (3, 5), (4, 2), (4, 3), (5, 2))
GRIDS = {"default": GRID, "d3": tuple(g for g in GRID if g[0] == 3), "small": ((3, 2), (3, 3))}
EXHAUSTIVE_LIMIT = 4096
DET_EXHAUSTIVE_LIMIT = 512
SAMPLES = 2000
ORBIT_SLACK = 2

PASS, FAIL, UNVERIFIED, SKIPPED = "pass", "fail", "unverified", "skipped"


# --- configuration ----------------------------------------------------------------------------

def split_prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise ConfigError(f"q={q} is not a prime power")
    p = prime_factors(q)[0]
    a = 0
    m = q
    while m % p == 0:
        m //= p
        a += 1
    if m != 1:
        raise ConfigError(f"q={q} is not a prime power")
    return p, a


@dataclass
class RunConfig:
    cases: list                       # (p, a, d) triples
    precision: int = 24
    max_precision: int = 96
    radius: int = 2
    slack: int = 0
    word_bound: int = WORD_BOUND
    fmt: str = "table"
    out: Optional[str] = None
    seed: int = 0
    certify: bool = True
    orbits: bool = False
    grid: Optional[str] = None

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["cases"] = [list(c) for c in self.cases]
        rec.pop("out")
        return rec


def resolve_case(p, a, d, q) -> tuple[int, int, int]:
    """Validate one (p, a, d) or (q, d); the size cap is checked before anything else."""
    if d is None:
        raise ConfigError("--d is required without --grid")
    if d < 2:
        raise ConfigError("d must be at least 2")
    if q is not None:
        if q < 2 or q ** d > MAX_ORDER:
            raise FieldTooLarge(f"size cap: q^d = {q}^{d} exceeds {MAX_ORDER}")
        qp, qa = split_prime_power(q)
        if p is not None and p != qp or a is not None and a != qa:
            raise ConfigError(f"--q {q} disagrees with --p/--a")
        return qp, qa, d
    if p is None:
        raise ConfigError("give --q or --p")
    a = 1 if a is None else a
    if a < 1:
        raise ConfigError("a must be positive")
    if p < 2 or p ** (a * d) > MAX_ORDER:
        raise FieldTooLarge(f"size cap: p^(ad) = {p}^{a * d} exceeds {MAX_ORDER}")
    if not is_prime(p):
        raise ConfigError(f"p={p} is not prime")
    return p, a, d


def config_from_args(ns) -> RunConfig:
    if ns.precision < 4:
        raise ConfigError("precision must be at least 4")
    if ns.radius < 0:
        raise ConfigError("radius must be non-negative")
    if ns.slack < 0:
        raise ConfigError("slack must be non-negative")
    if ns.word_bound < 1:
        raise ConfigError("word bound must be positive")
    if ns.grid:
        if ns.grid not in GRIDS:
            raise ConfigError(f"unknown grid {ns.grid!r}; choose from {sorted(GRIDS)}")
        cases = [resolve_case(None, None, d, q) for d, q in GRIDS[ns.grid]]
    else:
        cases = [resolve_case(ns.p, ns.a, ns.d, ns.q)]
    return RunConfig(cases, ns.precision, max(ns.max_precision, ns.precision), ns.radius, ns.slack,
                     ns.word_bound, ns.format, ns.out, ns.seed,
                     not getattr(ns, "no_certify", False), getattr(ns, "orbits", False), ns.grid)


# --- claims -------------------------------------------------------------------------------------

@dataclass
class Claim:
    id: str
    anchor: str
    status: str
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_record(self, timings: bool = False) -> dict:
        rec = {"id": self.id, "anchor": self.anchor, "status": self.status, "detail": self.detail}
        if timings:
            rec["seconds"] = round(self.seconds, 2)
        return rec


def _status(ok) -> str:
    return PASS if ok else FAIL


def jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def field_checks(P, rng: random.Random) -> dict:
    """Frobenius is an automorphism, norm multiplicative, trace additive and onto."""
    E, K, d, q = P.E, P.K, P.d, P.q
    n = E.order
    if n <= EXHAUSTIVE_LIMIT:
        rec = exhaustive_checks(P)
        rec["exhaustive"] = True
        return rec
    frob_ok = norm_ok = trace_ok = True
    for _ in range(SAMPLES):
        x, y = rng.randrange(n), rng.randrange(n)
        fx, fy = E.frobenius(x), E.frobenius(y)
        if E.frobenius(E.add(x, y)) != E.add(fx, fy) or E.frobenius(E.mul(x, y)) != E.mul(fx, fy):
            frob_ok = False
        if E.norm(E.mul(x, y)) != K.mul(E.norm(x), E.norm(y)):
            norm_ok = False
        if E.trace(E.add(x, y)) != K.add(E.trace(x), E.trace(y)):
            trace_ok = False
    traces = {E.trace(x) for x in range(n)}
    return {"exhaustive": False, "frobenius_additive": frob_ok, "frobenius_multiplicative": frob_ok,
            "norm_multiplicative": norm_ok, "trace_additive": trace_ok,
            "trace_surjective": len(traces) == q}


def norm_equation_check(P, prec: int) -> dict:
    ctx = context(P, prec)
    X = ctx.X
    lhs = series_norm(X, P.d, P.K)
    rhs = Series.exact(P.K, [1, 1])
    diff = lhs - rhs
    ok = diff.is_zero() and diff.absprec >= prec
    return {"precision": prec, "holds": ok, "absprec": diff.absprec,
            "x1_trace": P.E.trace(X.coefficient(1))}


def random_scalar(K, rng: random.Random, prec: int) -> Series:
    """A random element of K((Y))^x: Y^v times a polynomial with nonzero constant term."""
    v = rng.randrange(-2, 3)
    coeffs = [rng.randrange(1, K.order)] + [rng.randrange(K.order) for _ in range(rng.randrange(4))]
    return Series.exact(K, coeffs, v)


def determinant_check(P, prec: int, rng: random.Random, per_element: int = 3) -> dict:
    """det(z psi(a tau^k)) against the closed form, exactly up to the tracked window."""
    ctx = context(P, prec)
    hs = h_elements(P)
    exhaustive = P.E.order <= DET_EXHAUSTIVE_LIMIT
    if not exhaustive:
        hs = rng.sample(hs, min(len(hs), 60))
    bad = []
    checked = 0
    for a, k in hs:
        h = h_alg(ctx, a, k)
        M = psi(h)
        for _ in range(per_element):
            z = random_scalar(P.K, rng, prec)
            D = series_det([[z * s for s in row] for row in M])
            want = det_h_formula(P, a, k, z)
            checked += 1
            if not (D - want).is_zero():
                bad.append([P.E.discrete_log(a), k])
    return {"exhaustive": exhaustive, "checked": checked, "mismatches": bad[:5], "holds": not bad}


def h_group_checks(P, prec: int) -> dict:
    """H is closed under products and meets the vertex-regular group trivially."""
    ctx = context(P, prec)
    hs = h_elements(P)
    H = [psi_projective(h_alg(ctx, a, k)) for a, k in hs]
    keys = {elem_key(h) for h in H}
    gens = [psi_projective(h_alg(ctx, P.omega, 0)), psi_projective(AlgElem.tau(ctx))]
    closed = len(keys) == len(H) and all(elem_key(g * h) in keys for g in gens for h in H)
    hits = []
    for a, k in hs:
        x = h_alg(ctx, a, k)
        if x.is_one():
            continue
        if in_gamma(x):
            hits.append([P.E.discrete_log(a), k])
    return {"order": len(H), "distinct": len(keys) == len(H), "closed": closed,
            "meets_gamma_trivially": not hits, "gamma_hits": hits}


def singer_checks(P) -> dict:
    S = singer_pgl(P)
    pts = verify_simple_transitivity(S, points(P.K, P.d))
    hyp = verify_simple_transitivity(S, hyperplanes(P.K, P.d))
    n = normalizer_singer(P).order()
    want = P.d * P.n_points
    return {"points": bool(pts), "hyperplanes": bool(hyp), "singer_order": S.order(),
            "normalizer_order": n, "normalizer_expected": want}


def neighbor_check(P) -> dict:
    nb = neighbors(P.K, origin(P.K, P.d))
    want = sum(gaussian_binomial(P.d, k, P.q) for k in range(1, P.d))
    return {"count": len(nb), "expected": want, "formula": neighbor_count(P.q, P.d),
            "distinct": len(set(nb)) == len(nb)}


def escape_check(P, prec: int) -> dict:
    tr = p_element_escape(standard_unipotent(P.K, P.d, prec), steps=8, prec=prec)
    return {"exponents": tr.exponents, "growth_ok": tr.growth_ok(), "vanish_k": tr.vanish_k,
            "first_valuations": {f"{i}{j}": v for (i, j), v in tr.valuations[0].items()},
            "precision": prec}


def stabilizer_groups(cert) -> dict:
    lat = cert.lattices
    F, d = lat.ctx.K, lat.d
    out = {}
    for i in range(d):
        out[f"S{i}"] = localize(lat.S[i], F, d, i)
        out[f"N{i}"] = localize(lat.N[i], F, d, i)
    return out


def run_claims(P, cfg: RunConfig) -> list[Claim]:
    """The full claim suite for one (d, q)."""
    rng = random.Random(cfg.seed)
    d, q, p = P.d, P.q, P.p
    prec = cfg.precision
    claims: list[Claim] = []
    state: dict = {}

    def run(cid: str, anchor: str, fn: Callable[[], tuple]):
        t = time.perf_counter()
        try:
            status, detail = fn()
        except (PrecisionExhausted, SearchExhausted, SizeCapExceeded, NoRoot) as exc:
            status, detail = UNVERIFIED, {"reason": f"{type(exc).__name__}: {exc}"}
        claims.append(Claim(cid, anchor, status, jsonable(detail), time.perf_counter() - t))
        log.info("%s %s %s", P.label(), cid, status)

    def f_field():
        r = field_checks(P, rng)
        return _status(all(v for k, v in r.items() if k != "exhaustive")), r

    def f_norm():
        r = norm_equation_check(P, prec)
        return _status(r["holds"]), r

    def f_det():
        r = determinant_check(P, prec, rng)
        return _status(r["holds"]), r

    def f_h():
        r = h_group_checks(P, prec)
        return _status(r["closed"] and r["meets_gamma_trivially"] and r["order"] == d * P.n_points), r

    def f_psl():
        r = psl_intersection_report(context(P, prec))
        state["psl"] = r
        ok = r["H_cap_PSL"] == r["formula"] and r["index"] == r["index_formula"] and r["h_in_psl_agrees"]
        return _status(ok), r

    def f_singer():
        r = singer_checks(P)
        ok = r["points"] and r["hyperplanes"] and r["normalizer_order"] == r["normalizer_expected"]
        return _status(ok), r

    def f_nb():
        r = neighbor_check(P)
        return _status(r["count"] == r["expected"] == r["formula"] and r["distinct"]), r

    def f_cert():
        cert = certify_lattices(P, cfg.radius, cfg.slack, prec, cfg.max_precision, cfg.word_bound)
        state["cert"] = cert
        g = cert.lattices.gamma
        r = {"gamma": {"generators": len(g.gens), "candidates": g.candidates,
                       "images_distinct": g.images_distinct, "transitive_radius": g.certified_radius,
                       "transitive": g.transitive, "trivial_stabilizer": g.trivial_stabilizer},
             "precision": cert.precision, "attempts": [list(a) for a in cert.attempts]}
        ok = g.images_distinct and g.transitive and g.trivial_stabilizer
        return _status(ok), r

    def needs_cert(fn):
        def wrapped():
            if "cert" not in state:
                return SKIPPED, {"reason": "lattice construction unavailable"}
            return fn(state["cert"])
        return wrapped

    def f_orders(cert):
        lat = cert.lattices
        s = [len(Si) for Si in lat.S]
        n = [len(Ni) for Ni in lat.N]
        r = {"S_orders": s, "N_orders": n, "conjugator_words": lat.conjugator_words, "checks": lat.checks}
        ok = (set(s) == {P.n_points} and set(n) == {d * P.n_points}
              and all(lat.checks["stabilizes"]) and all(lat.checks["neighbour_transitive"]))
        return _status(ok), r

    def f_trans(name):
        def inner(cert):
            rep = cert.reports[name]
            rec = rep.to_record()
            if not rep.type_preserving:
                return FAIL, rec
            if not rep.transitive:
                # moves are confined to a finite ball, so extra orbits do not refute transitivity
                rec["reason"] = "several orbits with moves confined to ball(v_i, radius + slack)"
                return UNVERIFIED, rec
            return _status(all(rep.stabilizer_matches.values())), rec
        return inner

    def f_covol(cert):
        if not all(cert.reports[n].transitive for n in ("gamma0_prime", "gamma0")):
            return UNVERIFIED, {"reason": "needs one certified orbit per type"}
        st0 = [cert.reports["gamma0_prime"].stabilizer_orders[i] for i in range(d)]
        st1 = [cert.reports["gamma0"].stabilizer_orders[i] for i in range(d)]
        c0, c1 = covolume(st0), covolume(st1)
        r = {"gamma0_prime": c0, "gamma0": c1}
        if d == 3:
            s = q * q + q + 1
            r["closed_gamma0_prime"] = Fraction(3, s)
            r["closed_gamma0"] = Fraction(1, s)
            ok = c0 == Fraction(3, s) and c1 == Fraction(1, s)
        else:
            ok = c0 == Fraction(d, P.n_points) and c1 == Fraction(1, P.n_points)
        r["monotone"] = (c1 < c0) == (d * P.n_points > P.n_points)
        return _status(ok and r["monotone"]), r

    def f_compare():
        r = covolume_comparison(q)
        rec = {"q": q, "gamma0": r["gamma0"], "gamma1": r["gamma1"], "gamma1_smaller": r["gamma1_smaller"]}
        hyp = p >= 5 and math.gcd(3, q - 1) == 1
        rec["hypotheses_hold"] = hyp
        if d != 3:
            return SKIPPED, {"reason": "comparison is for d = 3"}
        if not hyp:
            return SKIPPED, rec
        return _status(r["gamma1_smaller"]), rec

    def f_psl_lat(cert):
        r = psl_intersection_report(context(P, cert.precision), cert.lattices)
        ok = r["matches_case_table"] and r["filtered_sets_closed"]
        case = r["case"]
        if case == "1a":
            ok = ok and r["Lambda0_eq_Gamma0"] and r["Lambda0_prime_eq_Gamma0_prime"]
        elif case == "1b":
            ok = ok and r["Lambda0_prime_eq_Gamma0_prime"] and not r["Lambda0_eq_Gamma0"]
        else:
            ok = ok and not r["Lambda0_prime_eq_Gamma0_prime"] and not r["Lambda0_eq_Gamma0"]
        return _status(ok), r

    def f_escape():
        r = escape_check(P, prec)
        return _status(r["growth_ok"]), r

    def f_cocompact(cert):
        groups = stabilizer_groups(cert)
        s_rep = cocompactness_report({k: v for k, v in groups.items() if k[0] == "S"}, p)
        n_rep = cocompactness_report({k: v for k, v in groups.items() if k[0] == "N"}, p)
        ok = s_rep["clean"] and s_rep["non_unipotent_p_torsion"] == 0 and n_rep["clean"]
        if d % p == 0:
            ok = ok and n_rep["non_unipotent_p_torsion"] > 0
        return _status(ok), {"gamma0_prime": s_rep, "gamma0": n_rep}

    def f_panel(cert):
        if d != 3:
            return SKIPPED, {"reason": "panel check is for d = 3"}
        r = panel_transitivity_check(cert.lattices)
        return _status(r["ok"]), r

    run("field.automorphism-norm-trace", "cyclic-extension-axioms", f_field)
    run("series.norm-equation", "norm-equation-solution", f_norm)
    run("algebra.determinant-identity", "determinant-of-h", f_det)
    run("h.closed-and-gamma-trivial", "h-group-structure", f_h)
    run("h.psl-count-and-index", "h-psl-index", f_psl)
    run("singer.simple-transitivity", "singer-cycles", f_singer)
    run("building.neighbor-count", "vertex-link", f_nb)
    if cfg.certify:
        run("gamma.discovery", "vertex-regular-group", f_cert)
        run("lattices.stabilizer-orders", "vertex-stabilizers", needs_cert(f_orders))
        run("lattices.gamma0-prime-type-transitive", "type-transitivity", needs_cert(f_trans("gamma0_prime")))
        run("lattices.gamma0-type-transitive", "type-transitivity", needs_cert(f_trans("gamma0")))
        run("lattices.covolumes", "covolume-formulas", needs_cert(f_covol))
        run("lattices.psl-case", "psl-intersections", needs_cert(f_psl_lat))
        run("lattices.cocompactness-scan", "no-unipotent-torsion", needs_cert(f_cocompact))
        run("lattices.panel-transitivity", "panel-regularity", needs_cert(f_panel))
    run("covolume.comparison", "hypothetical-lattice-comparison", f_compare)
    run("escape.unipotent-conjugation", "p-element-escape", f_escape)
    return claims


def verify_report(cfg: RunConfig, timings: bool = False) -> tuple[dict, int]:
    entries = []
    failing = None
    for p, a, d in cfg.cases:
        P = field_params(p, a, d)
        claims = run_claims(P, cfg)
        for c in claims:
            if c.status == FAIL and failing is None:
                failing = f"{P.label()}:{c.id}"
        entries.append({"params": P.to_record(), "claims": [c.to_record(timings) for c in claims],
                        "summary": {s: sum(c.status == s for c in claims)
                                    for s in (PASS, FAIL, UNVERIFIED, SKIPPED)}})
    report = {"schema_version": SCHEMA_VERSION, "tool": "singer-lattices", "version": __version__,
              "command": "verify", "config": cfg.to_record(), "entries": entries,
              "first_failure": failing, "ok": failing is None}
    return report, 0 if failing is None else 1


# --- table -------------------------------------------------------------------------------------

def table_row(P, cfg: RunConfig) -> dict:
    d, q = P.d, P.q
    ctx = context(P, cfg.precision)
    rep = psl_intersection_report(ctx)
    row = {"d": d, "q": q, "case": rep["case"], "S": P.n_points, "H": rep["H"],
           "H_cap_PSL": rep["H_cap_PSL"], "index": rep["index"], "index_formula": rep["index_formula"]}
    if d == 3:
        s = q * q + q + 1
        row["covolume_gamma0_prime"] = Fraction(3, s)
        row["covolume_gamma0"] = Fraction(1, s)
    else:
        row["covolume_gamma0_prime"] = None
        row["covolume_gamma0"] = None
    if cfg.certify:
        try:
            cert = certify_lattices(P, cfg.radius, cfg.slack, cfg.precision, cfg.max_precision,
                                    cfg.word_bound)
            for name in ("gamma0_prime", "gamma0"):
                rp = cert.reports[name]
                row[f"measured_{name}"] = covolume(rp.stabilizer_orders[i] for i in range(d)) \
                    if rp.transitive else None
        except (PrecisionExhausted, SearchExhausted, SizeCapExceeded) as exc:
            row["measured_error"] = f"{type(exc).__name__}: {exc}"
    return row


def table_report(cfg: RunConfig) -> dict:
    rows = [table_row(field_params(*c), cfg) for c in cfg.cases]
    return {"schema_version": SCHEMA_VERSION, "tool": "singer-lattices", "version": __version__,
            "command": "table", "config": cfg.to_record(), "rows": jsonable(rows)}


def _cell(x) -> str:
    return "—" if x is None else str(x)


def render_table(report: dict) -> str:
    cols = ["d", "q", "case", "S", "H", "H_cap_PSL", "index", "covolume_gamma0_prime", "covolume_gamma0"]
    extra = [c for c in ("measured_gamma0_prime", "measured_gamma0")
             if any(c in r for r in report["rows"])]
    cols += extra
    head = {"S": "|S|", "H": "|H|", "H_cap_PSL": "|H∩PSL|", "index": "index",
            "covolume_gamma0_prime": "covol Γ'0", "covolume_gamma0": "covol Γ0",
            "measured_gamma0_prime": "measured Γ'0", "measured_gamma0": "measured Γ0"}
    grid = [[head.get(c, c) for c in cols]] + [[_cell(r.get(c)) for c in cols] for r in report["rows"]]
    w = [max(len(row[i]) for row in grid) for i in range(len(cols))]
    lines = ["  ".join(x.rjust(w[i]) for i, x in enumerate(row)) for row in grid]
    lines.insert(1, "  ".join("-" * n for n in w))
    return "\n".join(lines) + "\n"


def render_verify(report: dict) -> str:
    out = []
    for e in report["entries"]:
        P = e["params"]
        out.append(f"d={P['d']} q={P['q']}")
        for c in e["claims"]:
            out.append(f"  [{c['status'].upper():10s}] {c['id']}")
        s = e["summary"]
        out.append(f"  {s['pass']} pass, {s['fail']} fail, {s['unverified']} unverified, {s['skipped']} skipped")
        for c in e["claims"]:
            if c["id"] == "lattices.covolumes" and c["status"] != SKIPPED:
                out.append(f"  covolumes: Γ'0 = {c['detail']['gamma0_prime']}, Γ0 = {c['detail']['gamma0']}")
            if c["id"] == "h.psl-count-and-index":
                out.append(f"  case {c['detail']['case']}: |H∩PSL| = {c['detail']['H_cap_PSL']}, "
                           f"index {c['detail']['index']}")
    out.append("OK" if report["ok"] else f"FAILED at {report['first_failure']}")
    return "\n".join(out) + "\n"


# --- ball export ----------------------------------------------------------------------------------

def ball_report(cfg: RunConfig) -> dict:
    if len(cfg.cases) != 1:
        raise ConfigError("export-ball takes a single (d, q)")
    P = field_params(*cfg.cases[0])
    B = ball(P.K, origin(P.K, P.d), cfg.radius)
    rec = B.to_record()
    rec["type_counts"] = {str(k): v for k, v in B.type_counts().items()}
    if cfg.orbits:
        cert = certify_lattices(P, 2, 0, cfg.precision, cfg.max_precision, cfg.word_bound)
        mats = cert.lattices.gamma0_prime().mats
        # moves may leave the exported ball, as in the certificates
        region = ball(P.K, origin(P.K, P.d), cfg.radius + ORBIT_SLACK, induced=False).index
        color = {}
        n_orbits = 0
        for k, v in enumerate(B.vertices):
            if k in color:
                continue
            orb = schreier_orbit(mats, v, region, schreier=False)
            for w in orb.transversal:
                if w in B.index:
                    color.setdefault(B.index[w], n_orbits)
            n_orbits += 1
        for vrec in rec["vertices"]:
            vrec["orbit"] = color[vrec["id"]]
        rec["orbit_group"] = "Gamma0'"
    return {"schema_version": SCHEMA_VERSION, "tool": "singer-lattices", "version": __version__,
            "command": "export-ball", "config": cfg.to_record(), "params": P.to_record(), "ball": rec}


def render_dot(report: dict) -> str:
    b = report["ball"]
    palette = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"]
    lines = ["graph ball {", "  node [style=filled];"]
    for v in b["vertices"]:
        attrs = [f'label="{v["id"]}"', f'type={v["type"]}', f'dist={v["dist"]}']
        key = v.get("orbit", v["type"])
        attrs.append(f'fillcolor="{palette[key % len(palette)]}"')
        if "orbit" in v:
            attrs.append(f'orbit={v["orbit"]}')
        lines.append(f'  v{v["id"]} [{", ".join(attrs)}];')
    for a, c in b["edges"]:
        lines.append(f"  v{a} -- v{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_ball_table(report: dict) -> str:
    b = report["ball"]
    counts = ", ".join(f"type {k}: {v}" for k, v in b["type_counts"].items())
    return f"{len(b['vertices'])} vertices, {len(b['edges'])} edges ({counts})\n"


# --- entry point ------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int)
    common.add_argument("--a", type=int)
    common.add_argument("--d", type=int)
    common.add_argument("--q", type=int, help="prime power, alternative to --p/--a")
    common.add_argument("--grid", help=f"preset grid: {', '.join(sorted(GRIDS))}")
    common.add_argument("--precision", type=int, default=24, help="t-adic coefficients tracked")
    common.add_argument("--max-precision", type=int, default=96)
    common.add_argument("--radius", type=int, default=2)
    common.add_argument("--slack", type=int, default=0)
    common.add_argument("--word-bound", type=int, default=WORD_BOUND)
    common.add_argument("--format", choices=("table", "json", "dot"), default="table")
    common.add_argument("--out", help="write here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="singer-lattices", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run the claim suite")
    v.add_argument("--no-certify", action="store_true", help="skip the lattice construction")
    t = sub.add_parser("table", parents=[common], help="index and covolume table")
    t.add_argument("--no-certify", action="store_true", help="closed forms only")
    e = sub.add_parser("export-ball", parents=[common], help="write a building ball")
    e.add_argument("--orbits", action="store_true", help="colour vertices by Gamma0' orbits")
    return ap


def emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"singer-lattices: error: {exc}", file=sys.stderr)
        return 2
    if cfg.fmt == "dot" and ns.command != "export-ball":
        print("singer-lattices: error: dot output is only for export-ball", file=sys.stderr)
        return 2
    code = 0
    try:
        if ns.command == "verify":
            report, code = verify_report(cfg)
            text = render_verify(report) if cfg.fmt == "table" else None
        elif ns.command == "table":
            report = table_report(cfg)
            text = render_table(report) if cfg.fmt == "table" else None
        else:
            report = ball_report(cfg)
            text = {"dot": render_dot, "table": render_ball_table}.get(cfg.fmt, lambda r: None)(report)
    except SingerError as exc:
        print(f"singer-lattices: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if text is None:
        text = json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"
    emit(text, cfg.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
