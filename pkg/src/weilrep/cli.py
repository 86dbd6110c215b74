"""Command-line front end: construct, verify, and emit JSON reports.

Subcommands: field | ring | torus | selfcheck.  Reports are deterministic
for a fixed seed (timing is omitted unless requested) and validate against
the schema shipped with the package; the exit code is 0 iff no check fails.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from importlib import resources

import numpy as np

from . import oscillator as osc
from . import ring_rep as rr
from . import torus as tor
from .rings import legendre
from .symplectic import (ClosureCapExceeded, SympModule, orbits,
                         symplectic_group, transvection_generators)

SCHEMA_VERSION = "1"


def _f(x):
    """Floats printed with 12 significant digits for diffable reports."""
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, complex):
        return [_f(x.real), _f(x.imag)]
    if isinstance(x, dict):
        return {k: _f(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_f(v) for v in x]
    return x


class Report:
    def __init__(self, command, config, seed):
        self.doc = {"schema_version": SCHEMA_VERSION, "command": command,
                    "config": config, "seed": seed, "checks": [],
                    "failures": 0, "timing_seconds": None}

    def add(self, name, anchor, status, measured=None, residual=None, note=None):
        rec = {"name": name, "anchor": anchor, "status": status}
        if measured is not None:
            rec["measured"] = _f(measured)
        if residual is not None:
            rec["residual"] = _f(float(residual))
        if note:
            rec["note"] = note
        self.doc["checks"].append(rec)
        if status == "fail":
            self.doc["failures"] += 1

    def check(self, name, anchor, ok, measured=None, residual=None, note=None):
        self.add(name, anchor, "pass" if ok else "fail", measured, residual, note)

    def finish(self, out=None, timing=None):
        if timing is not None:
            self.doc["timing_seconds"] = _f(timing)
        _validate(self.doc)
        text = json.dumps(self.doc, indent=2, sort_keys=True)
        if out:
            with open(out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return self.doc["failures"]


def _validate(doc):
    import jsonschema
    schema = json.loads(
        resources.files("weilrep").joinpath("report_schema.json").read_text())
    jsonschema.validate(doc, schema)


# -- field command -------------------------------------------------------------


def cmd_field(args) -> int:
    p, l = args.p, args.r
    rng = random.Random(args.seed)
    rep_doc = Report("field", {"p": p, "rank": l, "tol": args.tol,
                               "jobs": args.jobs}, args.seed)
    tol = args.tol
    if l not in (1, 2) or p > 7 or (l == 2 and p > 3):
        rep_doc.add("configuration", "caps", "skipped",
                    note="rank/prime outside the enumerable range")
        return rep_doc.finish(args.out, None)

    w1 = osc.weil_index(p, 1)
    rep_doc.check("weil-index-square", "weil-index-square",
                  abs(w1 ** 2 - legendre(-1, p)) <= tol,
                  measured={"omega1_sq": w1 ** 2, "legendre_minus1": legendre(-1, p)},
                  residual=abs(w1 ** 2 - legendre(-1, p)))
    worst = max(abs(osc.weil_index(p, a) / w1 - legendre(a, p))
                for a in range(1, p))
    rep_doc.check("weil-index-ratio", "weil-index-ratio", worst <= tol,
                  residual=worst)
    hd = abs(-osc.weil_index_quadratic_ext(p) - (-w1) ** 2)
    rep_doc.check("hasse-davenport", "hasse-davenport", hd <= tol, residual=hd)

    rep = osc.OscillatorRep(l, p)
    els = osc.sp_elements(l, p)
    exhaustive = len(els) <= 150
    if exhaustive:
        ops = {g: rep.op(g) for g in els}
        worst = 0.0
        for g in els:
            A = ops[g]
            for h in els:
                worst = max(worst, float(np.abs(
                    A @ ops[h] - ops[osc.mat_mul(g, h, p)]).max()))
        rep_doc.check("homomorphism-exhaustive", "genuine-splitting",
                      worst <= tol, measured={"group_order": len(els)},
                      residual=worst)
    else:
        worst = 0.0
        for _ in range(args.samples):
            g, h = rng.choice(els), rng.choice(els)
            worst = max(worst, float(np.abs(
                rep.op(g) @ rep.op(h) - rep.op(osc.mat_mul(g, h, p))).max()))
        rep_doc.check("homomorphism-sampled", "genuine-splitting",
                      worst <= tol,
                      measured={"group_order": len(els), "pairs": args.samples},
                      residual=worst)

    import itertools
    W = list(itertools.product(range(p), repeat=2 * l))
    worst = 0.0
    for _ in range(1000):
        g = rng.choice(els)
        w = rng.choice(W)
        t = rng.randrange(p)
        U = rep.op(g)
        lhs = U @ rep.rho(w, t) @ U.conj().T
        rhs = rep.rho(rep.heis_transform(g, w), t)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    rep_doc.check("heisenberg-intertwining", "covariance", worst <= tol,
                  residual=worst)

    rpt = osc.parabolic_identity_report(rep, tol=tol)
    rep_doc.check("parabolic-scalar", "parabolic-scalar",
                  not rpt["parabolic_failures"],
                  measured={"failures": len(rpt["parabolic_failures"])})
    rep_doc.check("siegel-flip-scalar", "siegel-flip-scalar",
                  rpt["J_deviation"] <= tol, residual=rpt["J_deviation"])

    cn = sum(abs(np.trace(rep.op(g))) ** 2 for g in els) / len(els) \
        if exhaustive else None
    if cn is not None:
        rep_doc.check("orbit-count-identity", "orbit-count-identity",
                      abs(cn - 2) <= 1e-6, measured={"character_norm": cn,
                                                     "orbit_count": 2})
    return rep_doc.finish(args.out, None)


# -- ring command ---------------------------------------------------------------


def cmd_ring(args) -> int:
    p, r, l, n = args.p, args.r, args.l, args.n
    rng = random.Random(args.seed)
    rep_doc = Report("ring", {"p": p, "r": r, "l": l, "n": n,
                              "cap_group": args.cap_group,
                              "cap_dim": args.cap_dim, "twist": args.twist,
                              "jobs": args.jobs},
                     args.seed)
    tol = args.tol
    spec = SympModule.standard(p, r, l, n)
    model_spec, lifted = rr.faithful_model(spec)
    rep_doc.doc["config"]["model_moduli"] = list(model_spec.moduli)
    rep_doc.doc["config"]["lifted"] = lifted
    if model_spec.size() > args.cap_dim ** 2:
        rep_doc.add("model", "caps", "skipped",
                    note=f"model dimension {model_spec.size() ** 0.5:.0f} "
                         f"exceeds cap {args.cap_dim}")
        return rep_doc.finish(args.out, None)
    rep = rr.build_ring_rep(spec)

    shells = rr.shell_dimensions(p, r, l, n)
    rep_doc.check("shell-dimensions", "shell-dimensions", shells["all_match"],
                  measured={sh["shell"]: [sh["dim_plus"], sh["dim_minus"]]
                            for sh in shells["shells"]})

    try:
        G = symplectic_group(rep.spec, cap=args.cap_group)
    except ClosureCapExceeded as exc:
        rep_doc.add("group-closure", "caps", "skipped", note=str(exc))
        G = None
    if G is None:
        # structural-only checks on sampled generator words
        gens = transvection_generators(rep.spec)
        worst = 0.0
        words = [rng.choice(gens) * rng.choice(gens) for _ in range(20)]
        for g in words:
            U = rep.op(g)
            worst = max(worst, float(np.abs(
                U @ U.conj().T - np.eye(rep.dim)).max()))
        rep_doc.check("unitarity-sampled", "unitarity", worst <= tol,
                      residual=worst)
        vecs = list(rep.spec.vectors())
        worst = 0.0
        for g in words[:10]:
            w = rng.choice(vecs)
            t = rng.randrange(rep.M)
            U = rep.op(g)
            lhs = U @ rep.heis_op(w, t) @ U.conj().T
            worst = max(worst, float(np.abs(
                lhs - rep.heis_op(g.act(w), t)).max()))
        rep_doc.check("heisenberg-intertwining", "covariance", worst <= tol,
                      residual=worst)
        return rep_doc.finish(args.out, None)

    rep_doc.doc["config"]["group_order"] = len(G)
    if args.twist:
        chi, k = rr.abelianization_character(G, args.twist)
        rep_doc.doc["config"]["twist_order"] = k
        rep = rr.TwistedRep(rep, chi)
    summands = rr.decompose(rep, G)
    dims = sorted(s.dim for s in summands)
    rep_doc.check("summand-count", "summand-count", True,
                  measured={"count": len(summands), "dims": dims,
                            "sum": sum(dims), "model_dim": rep.dim})
    chars = rr.summand_characters(rep, G, summands)
    gram = (chars @ chars.conj().T / len(G))
    irr_dev = float(np.abs(gram - np.eye(len(summands))).max())
    rep_doc.check("summand-irreducibility", "summand-irreducibility",
                  irr_dev <= 1e-6, residual=irr_dev)
    cn, dev = rr.character_norm(G, rep)
    orb = len(orbits(G.gens, list(rep.spec.vectors())))
    rep_doc.check("orbit-count-identity", "orbit-count-identity",
                  cn == orb and dev <= 1e-6,
                  measured={"character_norm": cn, "orbit_count": orb},
                  residual=dev)
    worst = 0.0
    for _ in range(args.samples // 100 or 50):
        g, h = rng.choice(G.elements), rng.choice(G.elements)
        worst = max(worst, float(np.abs(
            rep.op(g) @ rep.op(h) - rep.op(g * h)).max()))
    rep_doc.check("homomorphism-sampled", "genuine-splitting", worst <= tol,
                  residual=worst)
    vecs = list(rep.spec.vectors())
    worst = 0.0
    for _ in range(50):
        g = rng.choice(G.elements)
        w = rng.choice(vecs)
        t = rng.randrange(rep.M)
        U = rep.op(g)
        lhs = U @ rep.heis_op(w, t) @ U.conj().T
        worst = max(worst, float(np.abs(lhs - rep.heis_op(g.act(w), t)).max()))
    rep_doc.check("heisenberg-intertwining", "covariance", worst <= tol,
                  residual=worst)
    if rep.spec.n >= 3 and not rep.lifted:
        rep_doc.add("sigma-level-compat", "level-compat-diagnostic", "info",
                    measured=_sigma_level_diagnostic(rep, rng))
    return rep_doc.finish(args.out, None)


def _sigma_level_diagnostic(rep, rng):
    """Report-only: residue-block characters at levels n and n-2.

    The two canonical residue choices are pulled back through different
    reduction morphisms; this reports (never asserts) any discrepancy of
    their characters on matched group elements.
    """
    spec = rep.spec
    from .symplectic import reduce_level
    lower = SympModule.standard(spec.p, spec.r, spec.l, spec.n - 2,
                                flavor=spec.flavor or "B")
    low_rep = rr.build_ring_rep(lower, lift_degenerate=False)
    gens = symplectic_group(spec).gens
    worst = 0.0
    for g in gens[:10]:
        g_low = reduce_level(g, low_rep.spec)
        worst = max(worst, abs(np.trace(rep.sigma_op(g))
                               - np.trace(low_rep.sigma_op(g_low))))
    return {"max_sigma_char_discrepancy": _f(float(worst))}


# -- torus command ----------------------------------------------------------------


def cmd_torus(args) -> int:
    tspec = tor.TorusSpec(args.p, args.kind, args.uval, args.n)
    rep_doc = Report("torus", {"p": args.p, "kind": args.kind,
                               "uval": args.uval, "n": args.n,
                               "jobs": args.jobs}, args.seed)
    tol = args.tol
    ctx = tor.TorusContext(tspec)
    rep_doc.doc["config"]["torus_order"] = len(ctx.C)
    rep_doc.doc["config"]["model_dim"] = ctx.dim
    rep_doc.doc["config"]["visibility_depth"] = ctx.visibility_depth()
    report = tor.multiplicity_report(ctx)
    table = report["table"]
    rep_doc.check("mult-one", "mult-one",
                  all(rec["mult"] in (0, 1) for rec in table),
                  measured={rec["char"].label: rec["mult"] for rec in table},
                  residual=max(rec["deviation"] for rec in table))
    rep_doc.check("mult-sum-dim", "mult-sum-dim",
                  report["sum_mult"] == ctx.dim,
                  measured={"sum": report["sum_mult"], "dim": ctx.dim})
    rep_doc.check("appearance-criteria", "appearance-criteria",
                  bool(report["matching_twists"]),
                  measured={"raw_match": report["raw_match"],
                            "matching_twists": report["matching_twists"]})
    worst = 0.0
    for rec in table:
        if rec["mult"] == 1:
            vec = ctx.eigenvector(rec["char"])
            worst = max(worst, ctx.eigen_residual(rec["char"], vec))
    rep_doc.check("eigenvector-residual", "eigenvector-residual",
                  worst <= tol, residual=worst)
    rep_doc.add("conductor-table", "conductor-table", "info",
                measured={rec["char"].label: rec["conductor"]
                          for rec in table})
    if tspec.kind == "unramified" and tspec.u_val == 1:
        eta0_rec = next(rec for rec in table
                        if all(abs(rec["char"](t) - ctx.eta0(t)) < 1e-9
                               for t in ctx.C))
        rep_doc.check("eta0-exclusion", "eta0-exclusion",
                      eta0_rec["mult"] == 0,
                      measured={"eta0": eta0_rec["char"].label})
        h90 = all(ctx.eta0(t) == ctx.eta0_via_hilbert90(t) for t in ctx.C)
        rep_doc.check("eta0-hilbert90", "eta0-hilbert90", h90)
        if tspec.n == 1:
            _, results = tor.residue_operator_check(tspec, tol=tol)
            rep_doc.check("residue-operator-formulas",
                          "residue-operator-formulas",
                          all(rec["ok"] for rec in results),
                          residual=max(rec["deviation"] for rec in results))
    return rep_doc.finish(args.out, None)


# -- selfcheck ---------------------------------------------------------------------


def cmd_selfcheck(args) -> int:
    rep_doc = Report("selfcheck", {"jobs": args.jobs}, args.seed)
    ns = argparse.Namespace(**vars(args))
    failures = 0

    def run(fn, **over):
        nonlocal failures
        sub = argparse.Namespace(**{**vars(ns), **over, "out": os.devnull})
        failures += fn(sub)

    run(cmd_field, p=3, r=1)
    run(cmd_field, p=5, r=1)
    run(cmd_ring, p=3, r=1, l=0, n=1)
    run(cmd_ring, p=3, r=1, l=1, n=1)
    for kind, uval in (("unramified", 0), ("unramified", 1), ("ramified", 0)):
        run(cmd_torus, p=3, kind=kind, uval=uval, n=1)
    rep_doc.check("battery", "selfcheck", failures == 0,
                  measured={"sub_failures": failures})
    return rep_doc.finish(args.out, None)


# -- argument parsing ----------------------------------------------------------------


def _parser():
    ap = argparse.ArgumentParser(
        prog="weilrep",
        description="Weil representations over Z/p^n: verification reports")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--p", type=int, default=3)
        sp.add_argument("--r", "--rank", dest="r", type=int, default=1)
        sp.add_argument("--l", type=int, default=0)
        sp.add_argument("--n", type=int, default=1)
        sp.add_argument("--kind", choices=["unramified", "ramified"],
                        default="unramified")
        sp.add_argument("--uval", type=int, choices=[0, 1], default=0)
        sp.add_argument("--cap-group", dest="cap_group", type=int,
                        default=2_000_000)
        sp.add_argument("--cap-dim", dest="cap_dim", type=int, default=2000)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--twist", type=int, default=0,
                        help="tensor the ring representation by the given "
                             "power of the abelianization character")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=10_000)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--jobs", type=int,
                        default=int(os.environ.get("WEILREP_JOBS", "1")),
                        help="parallelism degree (runs are serial but the "
                             "flag is recorded for reproducibility)")
        sp.add_argument("--timing", action="store_true",
                        help="include wall-clock timing (breaks byte-for-byte "
                             "determinism of the report)")

    for name, fn in (("field", cmd_field), ("ring", cmd_ring),
                     ("torus", cmd_torus), ("selfcheck", cmd_selfcheck)):
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(fn=fn)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.p < 3 or args.p % 2 == 0:
        print("error: --p must be an odd prime", file=sys.stderr)
        return 2
    t0 = time.time()
    failures = args.fn(args)
    if args.timing:
        print(f"elapsed: {time.time() - t0:.3f}s", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
