"""Command-line interface: enumeration, verification suites and reports.

    quilthedra enumerate --family stable --d 4
    quilthedra faces --family bicolored --d 2 [--format dot]
    quilthedra facets --family seam --d 2 --e 1
    quilthedra signs [verify] --family functor --dmax 5
    quilthedra ainfty [--fixtures DIR]
    quilthedra relations [--fixtures DIR]
    quilthedra delays --d 4
    quilthedra verify-all --dmax 4

Reports are JSON on stdout (or --out); exit status 0 iff every check passed,
1 on a failed check, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from typing import Callable, Sequence

from . import ainfty, examples, gluing, polytopes, relations, signs, trees

COMMANDS = ("enumerate", "faces", "facets", "signs", "ainfty", "relations", "delays", "verify-all")


class Report:
    def __init__(self, argv: Sequence[str]):
        self.command = list(argv)
        self.checks: list[dict] = []
        self.data: dict = {}
        self._t0 = time.perf_counter()

    def check(self, name: str, ok: bool, **details) -> bool:
        entry = {"name": name, "status": "pass" if ok else "fail"}
        if details:
            entry["details"] = details
        self.checks.append(entry)
        return ok

    @property
    def ok(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    def to_json(self) -> dict:
        return {"command": self.command, "ok": self.ok, "checks": self.checks,
                "data": self.data, "wall_time": round(time.perf_counter() - self._t0, 3)}

    def to_text(self) -> str:
        lines = [" ".join(self.command)]
        for c in self.checks:
            lines.append(f"{c['status'].upper():4}  {c['name']}")
        lines.append("ok" if self.ok else "FAILED")
        return "\n".join(lines) + "\n"


def _default_d(family: str) -> int:
    return 4 if family == "stable" else 2


# ---------------------------------------------------------------------------
# subcommands


def cmd_enumerate(args, rep: Report) -> None:
    d = args.d or _default_d(args.family)
    ts = trees.enumerate_trees(args.family, d, args.e)
    rep.data = {"family": args.family, "d": d, "e": args.e, "count": len(ts),
                "trees": [t.expression() for t in ts]}
    rep.check("enumerate", len(ts) > 0, count=len(ts))


def cmd_faces(args, rep: Report) -> None:
    d = args.d or _default_d(args.family)
    p = polytopes.build_face_poset(args.family, d, args.e)
    fv = polytopes.f_vector(p)
    rep.data = {"family": args.family, "d": d, "e": args.e, "dim": p.dim, "f_vector": list(fv)}
    if args.format == "dot":
        rep.data["dot"] = p.to_dot()
    rep.check("euler", polytopes.euler_check(p))
    rep.check("graded", polytopes.is_graded(p))


def cmd_facets(args, rep: Report) -> None:
    d = args.d or _default_d(args.family)
    p = polytopes.build_face_poset(args.family, d, args.e, covers=False)
    fams = polytopes.facet_families(p)
    listing = [{"facet": p.faces[i].expression(), "tag": polytopes.facet_tag(p.faces[i])}
               for i in p.facets()]
    rep.data = {"family": args.family, "d": d, "e": args.e, "facet_families": fams, "facets": listing}
    bad = polytopes.codim_tag_mismatches(p)
    rep.check("codim-matches-tags", not bad, mismatches=bad[:10])


def cmd_signs(args, rep: Report) -> None:
    fams = [args.family] if args.family in ("assoc", "functor", "jacobian") else ["assoc", "functor", "jacobian"]
    dmax = args.dmax or 6
    rep.data = {}
    for fam in fams:
        r = signs.verify_family(fam, min(dmax, 5) if fam == "jacobian" else dmax)
        rep.data[fam] = {"cases": r["cases"], "failures": len(r["failures"])}
        rep.check(f"signs-{fam}", not r["failures"], counterexamples=r["failures"][:10])


def _ainfty_checks(rep: Report, fixtures, dmax: int) -> None:
    for stem in ("quiver3", "dgchain4", "dgchain4-twisted"):
        c = examples.load_instance(stem, fixtures)
        r = ainfty.check_ainfty(c)
        rep.check(f"ainfty-{stem}", r.ok, checked=r.checked, residuals=[x.to_json() for x in r.residuals[:5]])
    for stem in ("quiver3-unsigned", "dgchain4-flipped"):
        r = ainfty.check_ainfty(examples.load_instance(stem, fixtures))
        rep.check(f"negative-{stem}", not r.ok, residuals=len(r.residuals))
    c, w = examples.load_curved(fixtures)
    rep.check("curvature", ainfty.check_curvature_floer(c, w).ok)
    F = examples.load_functor("gauge", fixtures)
    rep.check("functor-gauge", ainfty.check_functor(F).ok)
    G = ainfty.compose_functors(ainfty.identity_functor(F.target), F)
    rep.check("functor-composition", ainfty.check_functor(G).ok)
    T = examples.load_homotopy(fixtures)
    rep.check("homotopy", ainfty.is_homotopy(T))
    S = examples.random_prenat(F, F, 1, seed=3, d_max=3)
    twice = ainfty.mu1_prenat(ainfty.mu1_prenat(S, 3), 3)
    rep.check("mu1-squared", not any(twice.component(a) for d in range(1, 4) for a in F.source.tuples(d))
              and not any(twice.t0.values()))
    for ident, top in (("assoc", 6), ("functor", 5), ("prenat-mu1", 4), ("homotopy", 4)):
        for d in range(2, min(top, max(dmax, 2)) + 1):
            r = ainfty.term_facet_correspondence(ident, d)
            rep.check(f"terms-{ident}-{d}", r["ok"], terms=r["terms"], facets=r["facets"],
                      unmatched_terms=r["unmatched_terms"], unmatched_facets=r["unmatched_facets"])


def cmd_ainfty(args, rep: Report) -> None:
    _ainfty_checks(rep, args.fixtures, args.dmax or 4)


def _relations_checks(rep: Report, fixtures) -> None:
    data = examples.load_relations(fixtures)
    _, (L01, L12) = data["embedded"]
    c = relations.geometric_compose(L01, relations.diagonal(L01.target))
    rep.check("compose-diagonal", c.relation == L01.relation and c.embedded
              and c.fiber_product_size == len(L01.relation))
    _, (b01, b12) = data["non_embedded"]
    c = relations.geometric_compose(b01, b12)
    rep.check("non-embedded", not c.embedded and c.fiber_product_size == 2, **c.to_json())
    for size in (1, 2, 3):
        r = relations.check_composition_associative(size)
        rep.check(f"associativity-{size}", not r["failures"], checked=r["checked"])
    brane = relations.GeneralizedCorrespondence.empty(L01.source)
    one = relations.phi_on_objects(L12, relations.phi_on_objects(L01, brane))
    two = relations.phi_on_objects(relations.concatenate(
        relations.GeneralizedCorrespondence.single(L01),
        relations.GeneralizedCorrespondence.single(L12), L12.width), brane)
    rep.check("phi-objects", one == two)
    merged, emb = relations.replace_adjacent(one, 0)
    rep.check("total-relation", relations.total_relation(merged) == relations.total_relation(one),
              embedded=emb)


def cmd_relations(args, rep: Report) -> None:
    _relations_checks(rep, args.fixtures)


def _delay_checks(rep: Report, d: int) -> None:
    fam = gluing.construct_delays(d)
    r = gluing.check_delay_compatibility(fam)
    rep.check(f"delays-{d}", r.ok, checked=r.checked, violations=[v.to_json() for v in r.violations[:10]])
    bad = []
    for a in fam.assignments:
        t = a.tree
        if t.d < 2 or t.ratio_class != "finite" or not _is_facet(t):
            continue
        if len(gluing.designated_vertices(t)) >= 2 and not gluing.regularity_surrogate(t, a).ok:
            bad.append(t.expression())
    rep.check(f"regularity-{d}", not bad, failures=bad)
    bad = []
    for n in range(2, d + 1):
        for t in trees.enumerate_trees("bicolored", n):
            if not _is_facet(t) or polytopes.facet_tag(t) != "biquilted-bubbles":
                continue
            bubbles = gluing.designated_vertices(t)
            for choice in itertools.product((0, 1), repeat=len(bubbles)):
                dims = [0] * len(t.vertices())
                for v, x in zip(bubbles, choice):
                    dims[v] = x
                z = gluing.zero_dimensional_bubbles(t, gluing.FormalModuliDims(tuple(dims), len(bubbles)))
                if (z["total"] == 0) != z["exactly_one"]:
                    bad.append([t.expression(), list(choice)])
    rep.check(f"zero-dimensional-bubble-{d}", not bad, failures=bad)


def _is_facet(t: trees.Tree) -> bool:
    return gluing.stratum_codim(t) == 1


def cmd_delays(args, rep: Report) -> None:
    d = args.d or 4
    _delay_checks(rep, d)
    rep.data = gluing.construct_delays(d).to_json()


def cmd_verify_all(args, rep: Report) -> None:
    dmax = args.dmax or 4
    for fam, e in (("stable", 0), ("colored", 0), ("seam", 1), ("bicolored", 0)):
        for d in range(2 if fam != "stable" else 3, dmax + 1):
            p = polytopes.build_face_poset(fam, d, e)
            rep.check(f"euler-{fam}-{d}-{e}", polytopes.euler_check(p), f_vector=list(polytopes.f_vector(p)))
            bad = polytopes.codim_tag_mismatches(p)
            rep.check(f"codim-{fam}-{d}-{e}", not bad, mismatches=bad[:10])
    for fam in ("assoc", "functor", "jacobian"):
        r = signs.verify_family(fam, min(dmax, 5) if fam == "jacobian" else dmax)
        rep.check(f"signs-{fam}", not r["failures"], cases=r["cases"])
    _ainfty_checks(rep, args.fixtures, dmax)
    _relations_checks(rep, args.fixtures)
    _delay_checks(rep, min(dmax, 4))


HANDLERS: dict[str, Callable] = {
    "enumerate": cmd_enumerate, "faces": cmd_faces, "facets": cmd_facets, "signs": cmd_signs,
    "ainfty": cmd_ainfty, "relations": cmd_relations, "delays": cmd_delays,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quilthedra", description="Polytope, sign and A-infinity checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "signs":
            p.add_argument("action", nargs="?", choices=["verify"], default="verify")
            p.add_argument("--family", default="all", choices=["assoc", "functor", "jacobian", "all"])
        else:
            p.add_argument("--family", default="stable", choices=list(trees.FAMILIES))
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--e", type=int, default=0)
        p.add_argument("--dmax", type=int, default=None)
        p.add_argument("--format", choices=["json", "text", "dot"], default="json")
        p.add_argument("--fixtures", default=None)
        p.add_argument("--out", default=None)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[int, Report]:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    rep = Report(argv)
    try:
        HANDLERS[args.command](args, rep)
    except (trees.TreeError, polytopes.PosetError, signs.SignError, ainfty.AInftyError,
            relations.RelationError, OSError, ValueError) as exc:
        rep.check("error", False, message=str(exc))
    if args.format == "dot" and "dot" in rep.data:
        text = rep.data["dot"]
    elif args.format == "text":
        text = rep.to_text()
    else:
        text = json.dumps(rep.to_json(), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return (0 if rep.ok else 1), rep


def main(argv: Sequence[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
