"""Command line driver.

Exit codes: 0 success, 1 verification mismatch, 2 usage or input error,
3 a computation cap was exceeded.
"""
from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

from . import io
from . import perm as P
from .abexact import FinAb, factorint
from .central import (DEFAULT_MAX_COCYCLE_UNKNOWNS, schur_cover, schur_multiplier,
                      stem_extensions)
from .cohom import DEFAULT_MAX_ORDER, DEFAULT_MAX_RANK
from .groups import DEFAULT_MAX_ORDER as GROUP_ENUM_ORDER
from .groups import (CapExceeded, FiniteGroup, derived_subgroup, stabilizer_of_point, subgroup,
                     trivial_subgroup)
from .norm1 import h1_chevalley, norm1_report, sylow_fast_path
from .obstruction import (classify_scenarios, ker_psi1, obs1, obstruction_via_cover,
                          phi_unramified)
from .subgroups import subgroup_classes

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
STRETCH_COCYCLE_UNKNOWNS = 100_000


def fmt(A: FinAb) -> str:
    return ",".join(str(d) for d in A.invariants) or "0"


class Context:
    def __init__(self, args):
        self.max_order = args.max_order
        # enumerating a group is cheap; the lattice caps apply to cohomology only
        self.enum_order = max(args.max_order, GROUP_ENUM_ORDER)
        self.caps = dict(max_order=args.max_order, max_rank=args.max_rank)
        self.max_unknowns = args.max_cocycle_unknowns
        self._covers = {}

    def group(self, gf: io.GroupFile) -> FiniteGroup:
        return gf.group(self.enum_order)

    def cover(self, G: FiniteGroup, label: str):
        if label not in self._covers:
            self._covers[label] = schur_cover(G, max_unknowns=self.max_unknowns)
        return self._covers[label]


def verdict_payload(table) -> str:
    """Collected verdicts: true/false counts when Ker psi1 has prime order, else
    the sorted multiplicities of the distinct killed subgroups."""
    if any(len(v.killed) != 1 for v in table.verdicts):
        raise AssertionError("verdict differs between orbit representatives")
    if sum(factorint(table.ker.order).values()) == 1:
        c = table.truth_counts()
        return ",".join(f"{str(k).lower()}:{c[k]}" for k in sorted(c, key=str))
    return ",".join(str(n) for n in sorted(table.multiset().values()))


def evaluate(op: str, gf: io.GroupFile, ctx: Context) -> str:
    """The value of one named quantity for one group, as a comparable string."""
    G = ctx.group(gf)
    H = stabilizer_of_point(G, 0)
    if op == "h1":
        return fmt(norm1_report(G, gf.label, **ctx.caps).h1_flabby)
    if op == "h1-J":
        return fmt(h1_chevalley(G, H))
    if op == "schur":
        return fmt(schur_multiplier(G, **ctx.caps))
    if op == "cover-order":
        return str(ctx.cover(G, gf.label).group.order)
    if op == "hab":
        return fmt(FinAb(ker_psi1(G, H).invariants))
    if op == "ker-psi1":
        return fmt(ker_psi1(G, H).structure)
    if op == "subgroup-classes":
        return str(len(subgroup_classes(G)))
    if op == "derived-order":
        return str(derived_subgroup(G).order)
    if op in ("cover-ker-psi1", "cover-dnr", "classify"):
        S = ctx.cover(G, gf.label)
        Ht = S.preimage(H)
        if op == "cover-ker-psi1":
            return fmt(ker_psi1(S.group, Ht).structure)
        if op == "cover-dnr":
            return fmt(phi_unramified(S.group, Ht).structure)
        return verdict_payload(classify_scenarios(S.group, S.epi, Ht))
    if op in ("classify-bundled-cover", "cover-ker-psi1-bundled"):
        cov, base, epi = io.load_cover(io.bundled_group(f"{gf.label}-cover"), gf, ctx.enum_order)
        Ht = epi.preimage(stabilizer_of_point(base, 0))
        if op == "cover-ker-psi1-bundled":
            return fmt(ker_psi1(cov, Ht).structure)
        return verdict_payload(classify_scenarios(cov, epi, Ht))
    if op in ("obs1-cyclic", "obs1-with-whole"):
        places = cyclic_subgroups(G) + ([G] if op == "obs1-with-whole" else [])
        return fmt(obstruction_via_cover(ctx.cover(G, gf.label), H, places).quotient)
    raise ValueError(f"unknown operation {op!r}")


def cyclic_subgroups(G: FiniteGroup) -> list[FiniteGroup]:
    return [c.rep for c in subgroup_classes(G) if len(c.rep.gens) <= 1]


def parse_place(spec: str, G: FiniteGroup, degree: int) -> list[FiniteGroup]:
    """``cyclic-all``, ``whole``, ``class:<i>`` or generators separated by ``;``."""
    if spec == "cyclic-all":
        return cyclic_subgroups(G)
    if spec == "whole":
        return [G]
    if spec.startswith("class:"):
        return [subgroup_classes(G)[int(spec[6:])].rep]
    gens = [G.table.index_of_perm(P.parse_cycles(s, degree)) for s in spec.split(";") if s.strip()]
    return [subgroup(G, gens)]


# ------------------------------------------------------------ subcommands

def resolve_file(name: str) -> Path:
    """A path as given, or else the bundled data file of that name."""
    p = Path(name)
    if not p.exists() and io.data_path(p.name).exists():
        return io.data_path(p.name)
    return p


def _groups(args) -> list[io.GroupFile]:
    gfs = io.parse_group_file(resolve_file(args.file))
    if args.label:
        gfs = [g for g in gfs if g.label in args.label]
    return gfs


def _emit(args, records):
    for r in records:
        print("\t".join([r.label, r.operation] + [f"{k}={v}" for k, v in r.payload.items()]))
    if args.store:
        io.append_records(args.store, sorted(records, key=lambda r: (r.label, r.operation)))


def cmd_h1(args, ctx):
    recs = []
    for gf in _groups(args):
        with io.Timer() as t:
            G = ctx.group(gf)
            rep = norm1_report(G, gf.label, sha_orders=(1, 2, 4), **ctx.caps)
        recs.append(io.ResultRecord(gf.label, "h1", {}, {
            "h1_flabby": fmt(rep.h1_flabby), "h1_J": fmt(rep.h1_J),
            "primitive": rep.primitive, "sylow_path": rep.sylow_path_used,
            "tamagawa": {str(k): str(v) for k, v in rep.tamagawa.items()},
            "conclusion": rep.conclusions()[0]}, t.elapsed))
    _emit(args, recs)
    return EXIT_OK


def cmd_h1_sylow(args, ctx):
    recs = []
    for gf in _groups(args):
        with io.Timer() as t:
            dec = sylow_fast_path(ctx.group(gf), **ctx.caps)
        recs.append(io.ResultRecord(gf.label, "h1-sylow", {}, {
            "prime": dec.prime, "sylow_order": dec.sylow_order, "h1_sylow": fmt(dec.h1_sylow),
            "decision": "deferred" if dec.deferred else fmt(dec.value)}, t.elapsed))
    _emit(args, recs)
    return EXIT_OK


def cmd_schur(args, ctx):
    recs = []
    for gf in _groups(args):
        with io.Timer() as t:
            M = schur_multiplier(ctx.group(gf), **ctx.caps)
        recs.append(io.ResultRecord(gf.label, "schur", {}, {"multiplier": fmt(M)}, t.elapsed))
    _emit(args, recs)
    return EXIT_OK


def cmd_cover(args, ctx):
    recs = []
    for gf in _groups(args):
        with io.Timer() as t:
            S = ctx.cover(ctx.group(gf), gf.label)
        recs.append(io.ResultRecord(gf.label, "cover", {}, {
            "order": S.group.order, "kernel": fmt(S.kernel), "stem": S.is_stem}, t.elapsed))
    _emit(args, recs)
    return EXIT_OK


def cmd_stem(args, ctx):
    recs = []
    for gf in _groups(args):
        with io.Timer() as t:
            G = ctx.group(gf)
            exts = stem_extensions(G, ctx.cover(G, gf.label))
        recs.append(io.ResultRecord(gf.label, "stem", {}, {
            "count": len(exts),
            "extensions": [f"{E.group.order}:{fmt(E.kernel)}:{'stem' if E.is_stem else 'not-stem'}"
                           for E in exts]}, t.elapsed))
    _emit(args, recs)
    return EXIT_OK


def cmd_obs1(args, ctx):
    recs = []
    for gf in _groups(args):
        with io.Timer() as t:
            G = ctx.group(gf)
            H = stabilizer_of_point(G, 0)
            places = [U for spec in (args.place or []) for U in parse_place(spec, G, gf.degree)]
            if args.level == "cover":
                rep = obstruction_via_cover(ctx.cover(G, gf.label), H, places, args.unramified)
            else:
                rep = obs1(G, H, places, args.unramified)
        recs.append(io.ResultRecord(gf.label, "obs1", {"place": args.place or [], "level": args.level,
                                                       "unramified": args.unramified}, {
            "hab": fmt(rep.ambient), "ker_psi1": fmt(rep.ker_structure),
            "ker_gens": rep.ker_psi1.generators, "image_gens": rep.image.generators,
            "quotient": fmt(rep.quotient)}, t.elapsed))
    _emit(args, recs)
    return EXIT_OK


def cmd_classify(args, ctx):
    recs = []
    for gf in _groups(args):
        with io.Timer() as t:
            G = ctx.group(gf)
            H = stabilizer_of_point(G, 0)
            if args.cover_file:
                covs = [c for c in io.parse_group_file(resolve_file(args.cover_file)) if c.base == gf.label]
                if not covs:
                    raise io.GroupFileError(f"no cover of {gf.label} in {args.cover_file}")
                cov, base, epi = io.load_cover(covs[0], gf, ctx.enum_order)
                G = base
                H = stabilizer_of_point(G, 0)
                level = "bundled cover"
            else:
                S = ctx.cover(G, gf.label)
                if args.stem is not None:
                    S = stem_extensions(G, S)[args.stem]
                cov, epi = S.group, S.epi
                level = "cover" if args.stem is None else f"stem {args.stem}"
            Hb = epi.preimage(H)
            tab = classify_scenarios(cov, epi, Hb)
        mult = Counter({"|".join(str(list(map(list, s))) for s in sorted(k)): n
                        for k, n in tab.multiset().items()})
        recs.append(io.ResultRecord(gf.label, "classify", {"level": level}, {
            "extension_order": cov.order, "ker_psi1": fmt(tab.ker.structure),
            "classes": len(tab.verdicts), "verdicts": dict(sorted(mult.items())),
            "kills_all": {str(k).lower(): v for k, v in tab.truth_counts().items()},
            "minimal_killing_classes": tab.minimal_killing_classes()}, t.elapsed))
    _emit(args, recs)
    return EXIT_OK


def cmd_verify(args, ctx):
    rows = io.load_expected(args.expected)
    if args.stretch:
        rows += io.load_expected(io.data_path("expected_stretch.tsv"))
        ctx.max_unknowns = max(ctx.max_unknowns, STRETCH_COCYCLE_UNKNOWNS)
    files = {}
    bad = 0
    for row in rows:
        try:
            gf = files.get(row.label) or io.bundled_group(row.label)
            files[row.label] = gf
            with io.Timer() as t:
                got = evaluate(row.operation, gf, ctx)
        except CapExceeded as e:
            print(f"CAP\t{row.label}\t{row.operation}\t{e}")
            bad = bad or EXIT_CAP
            continue
        ok = got == row.value
        print(f"{'ok' if ok else 'MISMATCH'}\t{row.label}\t{row.operation}\t{got}\t{t.elapsed:.1f}s"
              + ("" if ok else f"\texpected {row.value}\t[{row.citation}]"))
        if not ok:
            bad = EXIT_MISMATCH
    return bad


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="normtori", description=__doc__.splitlines()[0])
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER,
                   help="largest group order for lattice cohomology")
    p.add_argument("--max-rank", type=int, default=DEFAULT_MAX_RANK,
                   help="largest lattice rank")
    p.add_argument("--max-cocycle-unknowns", type=int, default=DEFAULT_MAX_COCYCLE_UNKNOWNS,
                   help="largest |G|^2 for the 2-cocycle solver")
    p.add_argument("--store", help="append result records to this JSONL file")
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--file", required=True, help="group file")
        s.add_argument("--label", action="append", help="only these labels (repeatable)")
        s.set_defaults(fn=fn)
        return s

    with_file("h1", cmd_h1, "H^1 of the flabby class of J_{G/H}")
    with_file("h1-sylow", cmd_h1_sylow, "Sylow fast path only")
    with_file("schur", cmd_schur, "Schur multiplier")
    with_file("cover", cmd_cover, "a Schur cover")
    with_file("stem", cmd_stem, "stem extensions")
    s = with_file("obs1", cmd_obs1, "first obstruction for given decomposition groups")
    s.add_argument("--place", action="append",
                   help="cyclic-all, whole, class:<i> or generators separated by ';'")
    s.add_argument("--unramified", action="store_true", help="include the unramified places")
    s.add_argument("--level", choices=("cover", "base"), default="cover",
                   help="compute over a Schur cover (the full obstruction) or over G itself")
    s = with_file("classify", cmd_classify, "verdicts over all decomposition group classes")
    s.add_argument("--cover-file", help="group file with a cover and generator images")
    s.add_argument("--stem", type=int, help="use the j-th stem extension instead of the cover")
    s = sub.add_parser("verify", help="check the bundled expected values")
    s.add_argument("--expected", help="TSV of expected values (default: bundled)")
    s.add_argument("--stretch", action="store_true",
                   help="also run the slow rows, with the cocycle cap raised to 100000")
    s.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ctx = Context(args)
    try:
        return args.fn(args, ctx)
    except CapExceeded as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except (io.GroupFileError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
