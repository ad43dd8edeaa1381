"""Command-line front end.

Exit codes: 0 success, 1 negative answer, 2 bad input, 3 resource guard.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .freegroup import (
    Automorphism,
    ClassMultiset,
    RankError,
    SignedPermutation,
    WordSyntaxError,
    format_letters,
    parse_classes,
    parse_word,
)
from .graphs import GraphError, MarkedGraph, standard_rose
from .nerve import (
    NerveSimplex,
    ResourceGuardError,
    check_enumeration_rank,
    delta_p,
    local_nerve,
    simplex_stabilizer_permutation,
)
from .ribbon import (
    RibbonError,
    RibbonStructure,
    SurfaceKey,
    boundary_classes,
    boundary_cycles,
    drawable,
    standard_surface_key,
    surface_invariants,
)
from .whitehead import (
    FREE,
    UP_TO_INVERSION,
    WhiteheadMove,
    all_moves,
    apply_move,
    descend,
    norm,
    star_graph,
    tuples_equivalent,
)

SCHEMA = "ribbonnerve/1"

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Serialisation helpers
# ---------------------------------------------------------------------------

def _classes_json(W: ClassMultiset) -> list:
    return [list(c.letters) for c in W]


def _classes_text(W: ClassMultiset) -> str:
    return ", ".join(format_letters(c.letters, W.rank) or "1" for c in W) or "(empty)"


def factor_json(f) -> dict:
    if isinstance(f, WhiteheadMove):
        return {"move": {"A": sorted(f.A, key=lambda x: (abs(x), x < 0)), "carrier": f.carrier}}
    return {"perm": list(f.perm)}


def automorphism_json(phi: Automorphism) -> dict:
    return {
        "rank": phi.rank,
        "images": [list(w.letters) for w in phi.images],
        "factors": [factor_json(f) for f in phi.factors],
    }


def parse_automorphism(data, rank: int | None) -> Automorphism:
    """``{"images": [...]}``, a bare list of images, or ``{"factors": [...]}``."""
    if isinstance(data, dict) and "factors" in data and "images" not in data:
        n = rank or data.get("rank")
        if not n:
            raise InputError("factor lists need a rank")
        factors = []
        for f in data["factors"]:
            if "move" in f:
                factors.append(WhiteheadMove(n, frozenset(f["move"]["A"]), f["move"]["carrier"]))
            else:
                factors.append(SignedPermutation(n, tuple(f["perm"])))
        return Automorphism(n, tuple(factors))
    images = data["images"] if isinstance(data, dict) else data
    if not isinstance(images, list):
        raise InputError("automorphism JSON must list basis images")
    n = rank or (data.get("rank") if isinstance(data, dict) else None) or len(images)
    try:
        return Automorphism.from_images([parse_word(w, n) for w in images], n)
    except ValueError as exc:
        if isinstance(exc, (WordSyntaxError, RankError)):
            raise
        raise InputError(f"images do not form a basis: {exc}") from exc


def load_json(arg: str, what: str):
    """Inline JSON text, or a path to a JSON file."""
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        path = Path(arg)
        if not path.exists():
            raise InputError(f"{what}: no such file {arg!r}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON ({exc.msg} at position {exc.pos})") from exc


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise InputError(f"--{name.replace('_', '-')} is required for this command")
    return value


def _classes(args) -> ClassMultiset:
    rank = _need(args, "rank")
    if rank < 1:
        raise InputError("--rank must be positive")
    return parse_classes(args.classes or "", rank)


def _graph(args) -> MarkedGraph:
    if args.graph is None:
        if args.rank is None:
            raise InputError("--graph or --rank is required")
        return standard_rose(args.rank)
    return MarkedGraph.from_json(load_json(args.graph, "graph"), args.rank)


def _surface(args, rank: int) -> SurfaceKey:
    if args.surface is None:
        raise InputError("--surface is required")
    s = args.surface.strip()
    if s.startswith("standard:"):
        g, p = (int(x) for x in s.split(":", 1)[1].split(","))
        K = standard_surface_key(g, p)
        if K.rank != rank:
            raise RankError(f"surface has rank {K.rank}, graph has rank {rank}")
        return K
    return SurfaceKey.from_json(load_json(args.surface, "surface"), rank)


def _emit(args, payload: dict, text: str, dot: str | None = None) -> None:
    args.format = args.format or "text"
    if args.format == "json":
        out = {"schema": SCHEMA, "command": args.command}
        out.update(payload)
        print(json.dumps(out, sort_keys=True))
    elif args.format == "dot":
        if dot is None:
            raise InputError(f"{args.command} has no DOT output")
        sys.stdout.write(dot)
    else:
        print(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_minimize(args) -> int:
    W = _classes(args)
    if args.scramble:
        rng = random.Random(args.seed)
        moves = all_moves(W.rank)
        for _ in range(args.scramble):
            W = apply_move(rng.choice(moves), W)
    trace = [norm(W)]
    moves = []
    current = W
    for step in descend(W):
        trace.append(step.norm)
        moves.append(step.move)
        current = step.multiset
    phi = Automorphism(W.rank, tuple(reversed(moves)))
    payload = {
        "rank": W.rank,
        "input": _classes_json(W),
        "trace": trace,
        "moves": [factor_json(m) for m in moves],
        "automorphism": automorphism_json(phi),
        "minimized": _classes_json(current),
        "norm": trace[-1],
    }
    lines = [f"input: {_classes_text(W)}", "trace: " + " -> ".join(map(str, trace))]
    lines += [f"  {m}" for m in moves]
    lines.append(f"minimized: {_classes_text(current)}")
    lines.append(f"norm: {trace[-1]}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_stargraph(args) -> int:
    W = _classes(args)
    S = star_graph(W)
    payload = {"rank": W.rank, "edges": [list(e) for e in S.edges], "norm": S.edge_count(),
               "single_cycle": S.is_single_cycle()}
    text = "\n".join(f"{format_letters((u,), W.rank)} -> {format_letters((v,), W.rank)}" for u, v in S.edges)
    args.format = args.format or "dot"
    _emit(args, payload, text or "(no edges)", S.to_dot())
    return EXIT_OK


def cmd_boundary(args) -> int:
    G = _graph(args)
    O = RibbonStructure.from_json(load_json(_need(args, "ribbon"), "ribbon"))
    cycles = boundary_cycles(G, O)
    g, s = surface_invariants(cycles, G)
    W = boundary_classes(G, O)
    payload = {"cycles": [list(c) for c in cycles], "genus": g, "punctures": s,
               "classes": [list(G.path_word(c).letters) for c in cycles],
               "surface": SurfaceKey(g, s, W).to_json()}
    lines = [f"genus {g}, punctures {s}"]
    lines += [f"  {list(c)}: {format_letters(G.path_word(c).letters, G.rank)}" for c in cycles]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_drawable(args) -> int:
    G = _graph(args)
    K = _surface(args, G.rank)
    O = drawable(G, K)
    payload = {"drawable": O is not None, "ribbon": None if O is None else O.to_json(),
               "surface": K.to_json()}
    text = "not drawable" if O is None else json.dumps(O.to_json(), sort_keys=True)
    _emit(args, payload, text)
    return EXIT_OK if O is not None else EXIT_NO


def cmd_equivalent(args) -> int:
    V = _classes(args)
    if args.target is None:
        raise InputError("--target is required")
    W = parse_classes(args.target, V.rank)
    respect = UP_TO_INVERSION if args.up_to_inversion else FREE
    phi = tuples_equivalent(V, W, respect)
    payload = {"equivalent": phi is not None,
               "automorphism": None if phi is None else automorphism_json(phi)}
    text = "not equivalent" if phi is None else str(phi)
    _emit(args, payload, text)
    return EXIT_OK if phi is not None else EXIT_NO


def cmd_nerve_local(args) -> int:
    n = _need(args, "rank")
    check_enumeration_rank(n)
    L = local_nerve(standard_rose(n))
    lines = [f"{len(L.vertices)} vertices, one simplex of dimension {len(L.vertices) - 1}"]
    lines += [f"  {i}: {K}" for i, K in enumerate(L.vertices)]
    lines.append("edge audit: " + ("all pass" if L.audit_ok() else "FAILED"))
    _emit(args, L.to_json(), "\n".join(lines), L.to_dot())
    return EXIT_OK


def cmd_delta(args) -> int:
    n = _need(args, "rank")
    p = _need(args, "dim")
    reps = delta_p(n, p)
    payload = {"rank": n, "dim": p, "count": len(reps), "representatives": [s.to_json() for s in reps]}
    lines = [f"{len(reps)} orbit representatives of {p}-simplices at rank {n}"]
    for s in reps:
        lines.append("  " + " | ".join(str(K) for K in s.members))
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_stabilizer(args) -> int:
    theta_arg = _need(args, "theta")
    data = load_json(_need(args, "simplex"), "simplex")
    if isinstance(data, dict) and "genus" in data:
        data = [data]
    s = NerveSimplex.from_json(data)
    theta = parse_automorphism(load_json(theta_arg, "theta"), args.rank or s.rank)
    lam = simplex_stabilizer_permutation(theta, s)
    payload = {"stabilizes": lam is not None, "permutation": None if lam is None else list(lam)}
    text = "not in stabilizer" if lam is None else f"in stabilizer, permutation {list(lam)}"
    _emit(args, payload, text)
    return EXIT_OK if lam is not None else EXIT_NO


COMMANDS = {
    "minimize": cmd_minimize,
    "stargraph": cmd_stargraph,
    "boundary": cmd_boundary,
    "drawable": cmd_drawable,
    "equivalent": cmd_equivalent,
    "nerve-local": cmd_nerve_local,
    "delta": cmd_delta,
    "stabilizer": cmd_stabilizer,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank", type=int)
    common.add_argument("--classes", help="comma-separated words, e.g. 'a b A B c, C'")
    common.add_argument("--graph", help="marked graph JSON (inline or file)")
    common.add_argument("--ribbon", help="ribbon structure JSON (inline or file)")
    common.add_argument("--surface", help="surface JSON (inline or file) or standard:g,s")
    common.add_argument("--format", choices=["json", "dot", "text"],
                        help="output format (default: dot for stargraph, text otherwise)")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="ribbonnerve", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("minimize", parents=[common], help="Whitehead-minimise a multiset of classes")
    p.add_argument("--scramble", type=int, default=0, help="apply this many random moves first (uses --seed)")
    sub.add_parser("stargraph", parents=[common], help="star graph of a multiset (DOT by default)")
    sub.add_parser("boundary", parents=[common], help="boundary cycles of a ribbon graph")
    sub.add_parser("drawable", parents=[common], help="ribbon structure drawing a graph in a surface")
    p = sub.add_parser("equivalent", parents=[common], help="automorphism carrying --classes to --target")
    p.add_argument("--target")
    p.add_argument("--up-to-inversion", action="store_true")
    sub.add_parser("nerve-local", parents=[common], help="local nerve at the standard rose")
    p = sub.add_parser("delta", parents=[common], help="orbit representatives of nerve simplices")
    p.add_argument("--dim", type=int)
    p = sub.add_parser("stabilizer", parents=[common], help="simplex stabilizer membership")
    p.add_argument("--theta", help="automorphism JSON: basis images")
    p.add_argument("--simplex", help="simplex JSON: list of surfaces")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InputError, RankError, GraphError, RibbonError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
