"""Layered gadget graph whose degeneracy encodes a pointer-chasing bit.

The construction turns a multilayer pointer-chasing instance into a graph
built from 2r+1 layers of m vertex triples. A triple is three copies of
one universe element; copies 1 and 2 of an even layer carry the two set
families of the next chase step as edges into the following layer, and
each odd layer is glued to the next even layer by a complete 3x3 join so
the chase step is replayed twice. Three special vertices hang off every
layer triple except the bit-0 triples of the last layer, and d auxiliary
vertices pad every remaining degree up to its exact target. The point of
the padding is that min-degree peeling then discharges the triples along
the pointer path first, and whether the peel runs to completion below
threshold d-3 depends only on the parity bit of the final pointer.

All element indexes here are 0-based, matching the instance model; copy
numbers are 1..3 and special names 1..3 because those are names, not
offsets. The parity bit of element index i is (i + 1) % 2, so bit-0
triples are those with odd 0-based index.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .graphs import Graph, dumps_graph, loads_graph
from .hpc import MHPCInstance, chase, validate_instance

Label = tuple


def _vid(m: int, ell: int, i: int, c: int) -> int:
    return (ell * m + i) * 3 + (c - 1)


def _round_robin_matching(d: int, k: int) -> list[tuple[int, int]]:
    """Factor k of the classic 1-factorization of the complete graph K_d.

    Vertex d-1 sits in the center; the others rotate. Factors for
    k = 0..d-2 are pairwise disjoint perfect matchings (d must be even).
    """
    pairs = [(d - 1, k)]
    for t in range(1, d // 2):
        pairs.append(((k + t) % (d - 1), (k - t) % (d - 1)))
    return pairs


@dataclass
class GadgetGraph:
    """A built gadget plus the bookkeeping needed to audit and export it.

    labels[v] is one of ("layer", ell, i, c), ("special", j), ("aux", t).
    deficiencies and matchings_added are builder diagnostics (pre-padding
    degree gaps and the number of auxiliary matchings used); they are not
    part of the exported sidecar and are None on a loaded gadget.
    """

    graph: Graph
    m: int
    r: int
    d: int
    labels: list[Label]
    triple_index: dict[tuple[int, int], tuple[int, int, int]]
    special_ids: tuple[int, int, int]
    aux_ids: tuple[int, ...]
    deficiencies: dict[int, int] | None = None
    matchings_added: int | None = None

    def layer_count(self) -> int:
        return 2 * self.r + 1


@dataclass(frozen=True)
class GadgetCheck:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class GadgetReport:
    checks: list[GadgetCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self) -> list[GadgetCheck]:
        return [c for c in self.checks if not c.ok]

    def summary(self) -> str:
        return "\n".join(
            f"{'PASS' if c.ok else 'FAIL'} {c.name}"
            + (f": {c.detail}" if c.detail and not c.ok else "")
            for c in self.checks
        )


def _element_bit(i: int) -> int:
    return (i + 1) % 2


def _target_degree(label: Label, d: int, r: int) -> int | None:
    """Exact target for layer/special vertices, None for aux (lower-bounded)."""
    kind = label[0]
    if kind == "special":
        return d + 6 * r
    if kind == "aux":
        return None
    _, ell, i, _ = label
    if ell == 0:
        return d - 3 if i == 0 else d
    return d - 1 if ell % 2 == 1 else d


@dataclass(frozen=True)
class AuxPadding:
    """The padding determined by the pre-padding vertex degrees.

    edges lists the auxiliary edges in the exact order the builder adds
    them; deficiencies maps each layer/special vertex to its degree gap;
    matchings is the number of disjoint auxiliary matchings appended.
    """

    edges: list[tuple[int, int]]
    deficiencies: dict[int, int]
    matchings: int


def aux_padding(m: int, r: int, degrees: list[int]) -> AuxPadding:
    """Compute the auxiliary edges from vertex degrees alone.

    degrees[v] is the degree of vertex v in the graph built so far, in
    canonical id order with the d auxiliary vertices last (still degree
    zero at that point). No other knowledge of the edge set is needed,
    which is what lets the last player of the streaming simulation add
    the padding after seeing only a degree table.
    """
    d = 6 * m * r + 3 * m
    layers = 2 * r + 1
    n_layer = 3 * m * layers
    n = n_layer + 3 + d
    if len(degrees) != n:
        raise ValueError(f"expected {n} degrees, got {len(degrees)}")
    aux = tuple(n_layer + 3 + t for t in range(d))
    edges: list[tuple[int, int]] = []
    deficiencies: dict[int, int] = {}
    aux_load = [degrees[u] for u in aux]
    cursor = 0
    for v in range(n_layer + 3):
        if v >= n_layer:
            want = d + 6 * r
        else:
            ell, i = v // 3 // m, v // 3 % m
            if ell == 0:
                want = d - 3 if i == 0 else d
            else:
                want = d - 1 if ell % 2 == 1 else d
        need = want - degrees[v]
        if need < 0:
            raise ValueError(
                f"vertex {v} already exceeds its target degree by {-need}"
            )
        deficiencies[v] = need
        for _ in range(need):
            edges.append((v, aux[cursor]))
            aux_load[cursor] += 1
            cursor = (cursor + 1) % d
    x = max(0, d + 6 * r + 3 - min(aux_load))
    if x > d - 1:
        raise ValueError(f"padding needs {x} matchings, only {d - 1} exist")
    for k in range(x):
        for a, b in _round_robin_matching(d, k):
            edges.append((aux[a], aux[b]))
    return AuxPadding(edges, deficiencies, x)


def build_gadget(inst: MHPCInstance) -> GadgetGraph:
    """Construct the gadget for a valid instance with m divisible by 4.

    Raises ValueError on bad inputs and RuntimeError if the finished
    graph fails its own audit (which would be a builder bug).
    """
    validate_instance(inst)
    m, r = inst.m, inst.r
    if m % 4:
        raise ValueError(f"universe size must be a multiple of 4, got {m}")
    d = 6 * m * r + 3 * m
    layers = 2 * r + 1
    n_layer = 3 * m * layers
    specials = tuple(n_layer + j for j in range(3))
    aux = tuple(n_layer + 3 + t for t in range(d))
    g = Graph(n_layer + 3 + d)
    trip = {
        (ell, i): tuple(_vid(m, ell, i, c) for c in (1, 2, 3))
        for ell in range(layers)
        for i in range(m)
    }

    labels: list[Label] = [()] * g.n
    for (ell, i), t in trip.items():
        for c, v in zip((1, 2, 3), t):
            labels[v] = ("layer", ell, i, c)
    for j, s in enumerate(specials, start=1):
        labels[s] = ("special", j)
    for t_idx, u in enumerate(aux):
        labels[u] = ("aux", t_idx)

    for t in trip.values():
        g.add_edge(t[0], t[1])
        g.add_edge(t[0], t[2])
        g.add_edge(t[1], t[2])

    # complete 3x3 join between the two layers replaying the same step
    for ell in range(1, r + 1):
        for i in range(m):
            for u in trip[(2 * ell - 1, i)]:
                for v in trip[(2 * ell, i)]:
                    g.add_edge(u, v)

    def encode(src: int, fam1, fam2) -> None:
        # copy 1 of the source triple carries fam1, copy 2 carries fam2;
        # a member j receives one edge on each of copies 1 and 2 of its
        # triple in layer src+1, so a set-pair intersection shows up as
        # all four cross edges and a one-sided member as exactly two
        for i in range(m):
            for copy, fam in ((1, fam1), (2, fam2)):
                u = _vid(m, src, i, copy)
                for j in sorted(fam[i]):
                    g.add_edge(u, _vid(m, src + 1, j, 1))
                    g.add_edge(u, _vid(m, src + 1, j, 2))

    for ell in range((r + 1) // 2):
        encode(4 * ell, inst.A[2 * ell], inst.B[2 * ell])
    for ell in range(r // 2):
        encode(4 * ell + 2, inst.C[2 * ell + 1], inst.D[2 * ell + 1])

    g.add_edge(specials[0], specials[1])
    g.add_edge(specials[0], specials[2])
    g.add_edge(specials[1], specials[2])
    for (ell, i), t in trip.items():
        if ell == 2 * r and _element_bit(i) == 0:
            continue
        for v in t:
            for s in specials:
                g.add_edge(s, v)

    # pad every layer/special vertex up to its target with auxiliary
    # edges handed out round-robin, then lift the auxiliary floor with
    # disjoint matchings; the plan depends only on the degrees so far
    padding = aux_padding(m, r, [g.degree(v) for v in range(g.n)])
    for u, v in padding.edges:
        g.add_edge(u, v)

    gg = GadgetGraph(
        graph=g,
        m=m,
        r=r,
        d=d,
        labels=labels,
        triple_index=trip,
        special_ids=specials,
        aux_ids=aux,
        deficiencies=padding.deficiencies,
        matchings_added=padding.matchings,
    )
    report = verify_gadget(gg)
    if not report.ok:
        bad = report.failed()[0]
        raise RuntimeError(f"gadget audit failed: {bad.name}: {bad.detail}")
    return gg


def verify_gadget(gg: GadgetGraph) -> GadgetReport:
    """Re-check every structural invariant from the graph and labels alone.

    Independent of the builder: everything is recomputed from gg.graph,
    gg.labels, and the (m, r, d) parameters. Each check lands in the
    report with an offending vertex or pair in the detail on failure.
    """
    g, m, r, d = gg.graph, gg.m, gg.r, gg.d
    report = GadgetReport()

    def check(name: str, ok: bool, detail: str = "") -> bool:
        report.checks.append(GadgetCheck(name, ok, detail))
        return ok

    layers = 2 * r + 1
    triples: dict[tuple[int, int], dict[int, int]] = {}
    special_of: dict[int, int] = {}
    aux_set: set[int] = set()
    for v, label in enumerate(gg.labels):
        kind = label[0] if label else "?"
        if kind == "layer":
            _, ell, i, c = label
            triples.setdefault((ell, i), {})[c] = v
        elif kind == "special":
            special_of[v] = label[1]
        elif kind == "aux":
            aux_set.add(v)

    shape_ok = (
        len(gg.labels) == g.n
        and len(special_of) == 3
        and len(aux_set) == d
        and len(triples) == layers * m
        and all(sorted(t) == [1, 2, 3] for t in triples.values())
        and d == 6 * m * r + 3 * m
    )
    check("shape", shape_ok, f"n={g.n}, aux={len(aux_set)}, d={d}")
    check(
        "vertex-count",
        g.n == 3 * m * layers + 3 + d,
        f"n={g.n}, expected {3 * m * layers + 3 + d}",
    )
    if not shape_ok:
        return report

    trip = {key: tuple(t[c] for c in (1, 2, 3)) for key, t in triples.items()}
    specials = sorted(special_of)
    q_nodes = {
        v
        for (ell, i), t in trip.items()
        if ell == 2 * r and _element_bit(i) == 0
        for v in t
    }

    bad = next(
        (
            (u, v)
            for t in trip.values()
            for u in t
            for v in t
            if u < v and not g.has_edge(u, v)
        ),
        None,
    )
    check("triangles", bad is None, f"missing {bad}" if bad else "")

    bad = None
    for ell in range(1, r + 1):
        for i in range(m):
            for u in trip[(2 * ell - 1, i)]:
                for v in trip[(2 * ell, i)]:
                    if not g.has_edge(u, v):
                        bad = (u, v)
    check("cross-pairs", bad is None, f"missing {bad}" if bad else "")

    # every even layer except the last feeds the next layer; the edges
    # from one source triple must hit copies 1 and 2 of a target triple
    # in pairs, never copy 3, and exactly one target per source gets all
    # four edges (that target is the next pointer)
    sig_detail = ""
    for src in range(0, 2 * r, 2):
        for i in range(m):
            s1, s2, s3 = trip[(src, i)]
            fours = 0
            for j in range(m):
                t1, t2, t3 = trip[(src + 1, j)]
                if any(
                    g.has_edge(u, t3) or g.has_edge(s3, v)
                    for u in (s1, s2, s3)
                    for v in (t1, t2)
                ):
                    sig_detail = f"copy-3 contact between ({src},{i}) and ({src + 1},{j})"
                paired_1 = g.has_edge(s1, t1) == g.has_edge(s1, t2)
                paired_2 = g.has_edge(s2, t1) == g.has_edge(s2, t2)
                if not (paired_1 and paired_2):
                    sig_detail = f"unpaired edges between ({src},{i}) and ({src + 1},{j})"
                if g.has_edge(s1, t1) and g.has_edge(s2, t1):
                    fours += 1
            if fours != 1 and not sig_detail:
                sig_detail = f"triple ({src},{i}) has {fours} full matches"
    check("encoding-signature", not sig_detail, sig_detail)

    bad_wire = ""
    expected_layer_side = set().union(*trip.values()) - q_nodes
    for s in specials:
        others = {v for v in specials if v != s}
        seen = set(g.adj[s])
        if not others <= seen:
            bad_wire = f"special {s} misses a special neighbor"
        layer_seen = {v for v in seen if gg.labels[v][0] == "layer"}
        if layer_seen != expected_layer_side:
            off = (layer_seen ^ expected_layer_side).pop()
            bad_wire = f"special {s} wiring wrong at vertex {off}"
    check("special-wiring", not bad_wire, bad_wire)
    check(
        "q-size",
        len(q_nodes) == 3 * m // 2,
        f"|Q|={len(q_nodes)}, expected {3 * m // 2}",
    )

    # no edge may fall outside the allowed families
    stray = ""
    for u, v in g.edges():
        lu, lv = gg.labels[u], gg.labels[v]
        ku, kv = lu[0], lv[0]
        if ku == "aux" or kv == "aux":
            continue  # aux may touch anything
        if ku == "special" and kv == "special":
            continue
        if "special" in (ku, kv):
            layer_end = v if ku == "special" else u
            if layer_end in q_nodes:
                stray = f"special edge into the excluded last-layer set: ({u},{v})"
                break
            continue
        _, eu, iu, cu = lu
        _, ev, iv, cv = lv
        if eu > ev or (eu == ev and iu > iv):
            eu, iu, cu, ev, iv, cv = ev, iv, cv, eu, iu, cu
        if eu == ev:
            if iu != iv:
                stray = f"edge inside one layer across triples: ({u},{v})"
                break
            continue
        if ev != eu + 1:
            stray = f"edge skips layers: ({u},{v})"
            break
        if eu % 2 == 1:
            if iu != iv:
                stray = f"cross-pair edge between different elements: ({u},{v})"
                break
        elif eu == 2 * r or cu == 3 or cv == 3:
            stray = f"illegal encoding edge: ({u},{v})"
            break
    check("edge-families", not stray, stray)

    bad_deg = ""
    for v, label in enumerate(gg.labels):
        want = _target_degree(label, d, r)
        have = g.degree(v)
        if want is None:
            if have < d + 6 * r + 3:
                bad_deg = f"aux vertex {v} has degree {have} < {d + 6 * r + 3}"
                break
        elif have != want:
            bad_deg = f"vertex {v} has degree {have}, target {want}"
            break
    check("degree-targets", not bad_deg, bad_deg)

    worst = max(
        (sum(1 for w in g.adj[u] if w in aux_set), u) for u in aux_set
    )
    check(
        "aux-induced-degree",
        worst[0] <= d - 3,
        f"aux vertex {worst[1]} has {worst[0]} aux neighbors > {d - 3}",
    )
    return report


def pointer_path_triples(
    gg: GadgetGraph, inst: MHPCInstance
) -> list[tuple[int, int, int]]:
    """The 2r+1 triples along the pointer path, in layer order.

    Entry 0 is the start triple in layer 0; each later pointer
    contributes its triple in both layers that replay that step. These
    are exactly the triples a min-degree peel removes first.
    """
    if (inst.m, inst.r) != (gg.m, gg.r):
        raise ValueError(
            f"instance is {inst.m}x{inst.r}, gadget is {gg.m}x{gg.r}"
        )
    walk = chase(inst)
    seq = [gg.triple_index[(0, 0)]]
    for step, (_, idx) in enumerate(walk.z[1:], start=1):
        seq.append(gg.triple_index[(2 * step - 1, idx)])
        seq.append(gg.triple_index[(2 * step, idx)])
    return seq


# ---------------------------------------------------------------------------
# export


def sidecar_json(gg: GadgetGraph) -> str:
    obj = {
        "m": gg.m,
        "r": gg.r,
        "d": gg.d,
        "labels": [list(label) for label in gg.labels],
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def gadget_from_strings(graph_text: str, sidecar_text: str) -> GadgetGraph:
    g = loads_graph(graph_text)
    obj = json.loads(sidecar_text)
    labels = [tuple(label) for label in obj["labels"]]
    if len(labels) != g.n:
        raise ValueError(
            f"sidecar lists {len(labels)} labels for {g.n} vertices"
        )
    trip: dict[tuple[int, int], dict[int, int]] = {}
    specials: dict[int, int] = {}
    aux: list[int] = []
    for v, label in enumerate(labels):
        if label[0] == "layer":
            trip.setdefault((label[1], label[2]), {})[label[3]] = v
        elif label[0] == "special":
            specials[label[1]] = v
        elif label[0] == "aux":
            aux.append(v)
        else:
            raise ValueError(f"unknown label kind {label[0]!r} at vertex {v}")
    triple_index = {
        key: (t[1], t[2], t[3]) for key, t in sorted(trip.items())
    }
    return GadgetGraph(
        graph=g,
        m=obj["m"],
        r=obj["r"],
        d=obj["d"],
        labels=labels,
        triple_index=triple_index,
        special_ids=tuple(specials[j] for j in (1, 2, 3)),
        aux_ids=tuple(aux),
    )


def save_gadget(gg: GadgetGraph, path: str) -> None:
    """Write the graph text at path and the label sidecar at path.json."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_graph(gg.graph))
    with open(path + ".json", "w", encoding="ascii") as fh:
        fh.write(sidecar_json(gg) + "\n")


def load_gadget(path: str) -> GadgetGraph:
    with open(path, "r", encoding="ascii") as fh:
        graph_text = fh.read()
    with open(path + ".json", "r", encoding="ascii") as fh:
        sidecar_text = fh.read()
    return gadget_from_strings(graph_text, sidecar_text)


def with_graph(gg: GadgetGraph, g: Graph) -> GadgetGraph:
    """A copy of gg carrying a different graph (for audit experiments)."""
    return dataclasses.replace(gg, graph=g)
