"""Pointer chasing over hidden set intersections.

The instance model: two universes of size m (an x side and a y side).
For each layer j and each x-coordinate, players A and B hold sets over the
y universe that intersect in exactly one element; for each y-coordinate,
players C and D hold sets over the x universe with the same promise. The
pointer walk starts at x_0 and alternates sides, resolving one hidden
intersection per step; the answer bit is the parity of the final pointer
under 1-based indexing, so bit = (index + 1) % 2 with 0-based storage.

Layers are stored even where they cannot affect the walk (the y-side
families on odd steps and x-side families on even steps stay unused);
samplers fill them anyway so every instance is uniform to validate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from random import Random

from .comm import (
    CommLedger,
    RoundSchedule,
    charvec,
    flag,
    nothing,
    run_four_party,
    uint,
    vec,
)


class Abstain:
    """Returned by the misaligned protocol when the walk cannot finish."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Abstain"


ABSTAIN = Abstain()


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class SetIntInstance:
    m: int
    X: frozenset[int]
    Y: frozenset[int]

    @property
    def e_star(self) -> int:
        (e,) = self.X & self.Y
        return e


def validate_setint(si: SetIntInstance) -> None:
    for side, s in (("first", si.X), ("second", si.Y)):
        if any(not 0 <= e < si.m for e in s):
            raise ValueError(f"{side} set leaves the universe [{si.m})")
    if len(si.X & si.Y) != 1:
        raise ValueError(
            f"sets intersect in {len(si.X & si.Y)} elements, need exactly 1"
        )


@dataclass
class MHPCInstance:
    """r layers of hidden-pointer data over two size-m universes.

    A[j][x] and B[j][x] are y-side sets; C[j][y] and D[j][y] are x-side
    sets. All indices 0-based, layer-major.
    """

    m: int
    r: int
    A: list[list[frozenset[int]]]
    B: list[list[frozenset[int]]]
    C: list[list[frozenset[int]]]
    D: list[list[frozenset[int]]]

    def is_bhpc(self) -> bool:
        return all(
            fam[j] == fam[0]
            for fam in (self.A, self.B, self.C, self.D)
            for j in range(self.r)
        )


def validate_instance(inst: MHPCInstance) -> None:
    if inst.m < 1 or inst.r < 1:
        raise ValueError("need m >= 1 and r >= 1")
    for fam, name in ((inst.A, "A"), (inst.B, "B"), (inst.C, "C"), (inst.D, "D")):
        if len(fam) != inst.r or any(len(layer) != inst.m for layer in fam):
            raise ValueError(f"family {name} is not r x m")
    for j in range(inst.r):
        for x in range(inst.m):
            _pair_target(inst, j, "x", x)
        for y in range(inst.m):
            _pair_target(inst, j, "y", y)


def _pair_target(inst: MHPCInstance, j: int, side: str, i: int) -> int:
    """Resolve one promised intersection; complain naming the pair."""
    if side == "x":
        first, second, names = inst.A[j][i], inst.B[j][i], ("A", "B")
    else:
        first, second, names = inst.C[j][i], inst.D[j][i], ("C", "D")
    inter = first & second
    if len(inter) != 1:
        raise ValueError(
            f"layer {j} pair {names[0]}[{j}][{i}]/{names[1]}[{j}][{i}] "
            f"intersects in {len(inter)} elements, need exactly 1"
        )
    (t,) = inter
    if not 0 <= t < inst.m:
        raise ValueError(f"target {t} outside universe [{inst.m})")
    return t


# ---------------------------------------------------------------------------
# samplers


def sample_setint(m: int, rng: Random) -> SetIntInstance:
    """One hard instance: two size-m/4 sets intersecting in a single point."""
    if m < 4 or m % 4:
        raise ValueError("universe size must be a positive multiple of 4")
    q = m // 4
    xp = set(rng.sample(range(m), q - 1))
    yp = set(rng.sample(sorted(set(range(m)) - xp), q - 1))
    e = rng.choice(sorted(set(range(m)) - xp - yp))
    return SetIntInstance(m, frozenset(xp | {e}), frozenset(yp | {e}))


def sample_side_marginal(m: int, rng: Random) -> frozenset[int]:
    """One party's input alone: a uniform size-m/4 subset."""
    if m < 4 or m % 4:
        raise ValueError("universe size must be a positive multiple of 4")
    return frozenset(rng.sample(range(m), m // 4))


def sample_given_other(m: int, other: frozenset[int], rng: Random) -> frozenset[int]:
    """Sample one side conditioned on the other side's set.

    Given the peer set, the intersection point is uniform inside it and the
    rest of the sampled set is a uniform subset of the complement.
    """
    if m < 4 or m % 4:
        raise ValueError("universe size must be a positive multiple of 4")
    e = rng.choice(sorted(other))
    rest = rng.sample(sorted(set(range(m)) - other), m // 4 - 1)
    return frozenset(rest) | {e}


def sample_bmhpc(m: int, r: int, rng: Random) -> MHPCInstance:
    """All r layers drawn independently per coordinate."""
    if r < 1:
        raise ValueError("need r >= 1")
    A, B, C, D = [], [], [], []
    for _ in range(r):
        ab = [sample_setint(m, rng) for _ in range(m)]
        cd = [sample_setint(m, rng) for _ in range(m)]
        A.append([si.X for si in ab])
        B.append([si.Y for si in ab])
        C.append([si.X for si in cd])
        D.append([si.Y for si in cd])
    return MHPCInstance(m, r, A, B, C, D)


def sample_bhpc(m: int, r: int, rng: Random) -> MHPCInstance:
    """A single layer drawn once and replicated r times."""
    base = sample_bmhpc(m, 1, rng)
    return MHPCInstance(
        m, r,
        [base.A[0]] * r, [base.B[0]] * r, [base.C[0]] * r, [base.D[0]] * r,
    )


# ---------------------------------------------------------------------------
# the pointer walk


@dataclass(frozen=True)
class PointerPath:
    z: list[tuple[str, int]]  # (side, 0-based index), starting at ("x", 0)
    bit: int


def chase(inst: MHPCInstance) -> PointerPath:
    """Resolve the walk layer by layer from the raw sets."""
    side, idx = "x", 0
    path = [(side, idx)]
    for j in range(inst.r):
        step = j + 1
        if step % 2 == 1:
            idx = _pair_target(inst, j, "x", idx)
            side = "y"
        else:
            idx = _pair_target(inst, j, "y", idx)
            side = "x"
        path.append((side, idx))
    return PointerPath(path, (path[-1][1] + 1) % 2)


# ---------------------------------------------------------------------------
# aligned protocol: the pair holding the pending step always speaks


def aligned_protocol(inst: MHPCInstance,
                     schedule: RoundSchedule) -> tuple[int, CommLedger]:
    """Chase the pointer with one hidden intersection solved per round.

    Per round: the holding pair exchanges an m-bit set vector and the
    answer index, then announces the new pointer and its parity bit.
    """
    if schedule.starter != "AB":
        raise ValueError(
            "schedule must open with the pair holding the first step; "
            "use misaligned_bhpc_protocol for the flipped order"
        )
    if schedule.r != inst.r:
        raise ValueError(f"schedule has {schedule.r} rounds, instance needs {inst.r}")
    parties = {
        name: _aligned_party(name, inst) for name in ("A", "B", "C", "D")
    }
    return run_four_party(schedule, parties)


def _aligned_party(name, inst):
    fam = {"A": inst.A, "B": inst.B, "C": inst.C, "D": inst.D}[name]
    partner = {"A": "B", "B": "A", "C": "D", "D": "C"}[name]
    m = inst.m
    idx = 0
    for j in range(inst.r):
        x_step = j % 2 == 0
        my_round = (name in "AB") == x_step
        if my_round and name in "AC":
            yield ("send", partner, charvec(fam[j][idx], m))
            t = yield ("recv",)
            yield ("broadcast", vec(uint(t, m), flag((t + 1) % 2 == 1)))
            idx = t
        elif my_round:
            theirs = yield ("recv",)
            inter = fam[j][idx] & theirs
            if len(inter) != 1:
                raise ValueError(
                    f"layer {j} pair intersects in {len(inter)} elements"
                )
            (t,) = inter
            yield ("send", partner, uint(t, m))
            got = yield ("recv",)
            idx = got[0]
        else:
            got = yield ("recv",)
            idx = got[0]
    yield ("output", (idx + 1) % 2)


# ---------------------------------------------------------------------------
# misaligned protocol: wrong pair speaks first, rescued by pre-solving


def misaligned_bhpc_protocol(inst: MHPCInstance, N: int,
                             rng: Random) -> tuple[int | Abstain, CommLedger]:
    """Walk the pointer under a schedule where the wrong pair opens.

    Round 1: the y-side pair solves N uniformly chosen y-coordinates and
    announces the answer table. Later rounds advance the walk when the
    speaking pair holds the pending step and stall otherwise; a pending
    y-step whose pointer appears in the table is skipped for free. The
    final step is always a y-step short of a round, so the run finishes
    exactly when the table covers the last pointer (only even round
    budgets can finish). Returns ABSTAIN when the walk falls short.
    """
    if not inst.is_bhpc():
        raise ValueError("misaligned pre-solving needs identical layers")
    if not 0 <= N <= inst.m:
        raise ValueError(f"N must be in [0, {inst.m}]")
    sel = sorted(rng.sample(range(inst.m), N))
    parties = {
        name: _misaligned_party(name, inst, sel) for name in ("A", "B", "C", "D")
    }
    return run_four_party(RoundSchedule(inst.r, "CD"), parties)


def _misaligned_party(name, inst, sel):
    fam = {"A": inst.A, "B": inst.B, "C": inst.C, "D": inst.D}[name]
    m, r = inst.m, inst.r

    # round 1: pre-solve the selected y-coordinates, announce the table
    if name == "C":
        for y in sel:
            yield ("send", "D", charvec(fam[0][y], m))
        got = yield ("recv",)
    elif name == "D":
        pairs = []
        for y in sel:
            theirs = yield ("recv",)
            inter = fam[0][y] & theirs
            if len(inter) != 1:
                raise ValueError(
                    f"layer 0 pair intersects in {len(inter)} elements"
                )
            (t,) = inter
            pairs.append((y, t))
        got = tuple(pairs)
        yield ("broadcast", vec(*(vec(uint(y, m), uint(t, m)) for y, t in pairs)))
    else:
        got = yield ("recv",)
    table = dict(got)

    frontier, idx = 0, 0

    def skip():
        nonlocal frontier, idx
        while frontier < r and frontier % 2 == 1 and idx in table:
            idx = table[idx]
            frontier += 1

    skip()
    for round_no in range(2, r + 1):
        ab_round = round_no % 2 == 0
        my_round = (name in "AB") == ab_round
        pending_is_x = frontier % 2 == 0  # x-side pointer, pair AB's step
        active = frontier < r and pending_is_x == ab_round
        if my_round and name in "AC":
            if active:
                yield ("send", partner := ("B" if name == "A" else "D"),
                       charvec(fam[frontier][idx], m))
                t = yield ("recv",)
                yield ("broadcast", uint(t, m))
                idx, frontier = t, frontier + 1
            else:
                yield ("broadcast", nothing())
        elif my_round:
            if active:
                theirs = yield ("recv",)
                inter = fam[frontier][idx] & theirs
                if len(inter) != 1:
                    raise ValueError(
                        f"layer {frontier} pair intersects in {len(inter)} elements"
                    )
                (t,) = inter
                yield ("send", "A" if name == "B" else "C", uint(t, m))
                yield ("recv",)
                idx, frontier = t, frontier + 1
            else:
                yield ("recv",)
        else:
            got = yield ("recv",)
            if active:
                idx, frontier = got, frontier + 1
        skip()

    yield ("output", (idx + 1) % 2 if frontier == r else ABSTAIN)


# ---------------------------------------------------------------------------
# embedding a single set-intersection input into a full instance


def embed_setint(si: SetIntInstance, j: int, r: int, rng_public: Random,
                 rng_private_a: Random, rng_private_b: Random
                 ) -> tuple[MHPCInstance, int]:
    """Plant (X, Y) at a uniform coordinate of layer j's x-side family.

    The split mirrors who could know what: coordinate position and the
    off-coordinate halves that both sides must agree on are public; each
    side's remaining halves are private, drawn conditioned on the public
    ones. Conditioned on the public draw, the output follows the hard
    distribution whenever (X, Y) does. Layers are 1-based here to match
    step numbering; returns the instance and the planted coordinate.
    """
    m = si.m
    if not 1 <= j <= r:
        raise ValueError(f"target layer {j} outside 1..{r}")
    validate_setint(si)
    if len(si.X) != m // 4 or len(si.Y) != m // 4 or m % 4:
        raise ValueError("input must have the hard shape: two size-m/4 sets")

    I = rng_public.randrange(m)
    A = [[None] * m for _ in range(r)]
    B = [[None] * m for _ in range(r)]
    C = [[None] * m for _ in range(r)]
    D = [[None] * m for _ in range(r)]
    jj = j - 1

    A[jj][I], B[jj][I] = si.X, si.Y
    for i in range(I):
        A[jj][i] = sample_side_marginal(m, rng_public)
        B[jj][i] = sample_given_other(m, A[jj][i], rng_private_b)
    for i in range(I + 1, m):
        B[jj][i] = sample_side_marginal(m, rng_public)
        A[jj][i] = sample_given_other(m, B[jj][i], rng_private_a)

    for layer in range(r):
        for y in range(m):
            cd = sample_setint(m, rng_public)
            C[layer][y], D[layer][y] = cd.X, cd.Y
        if layer == jj:
            continue
        if layer < jj:
            for i in range(m):
                A[layer][i] = sample_side_marginal(m, rng_public)
                B[layer][i] = sample_given_other(m, A[layer][i], rng_private_b)
        else:
            for i in range(m):
                B[layer][i] = sample_side_marginal(m, rng_public)
                A[layer][i] = sample_given_other(m, B[layer][i], rng_private_a)

    return MHPCInstance(m, r, A, B, C, D), I


# ---------------------------------------------------------------------------
# fixtures, padding, serialization


def worked_example() -> MHPCInstance:
    """The hand-checkable three-element, three-layer instance.

    Its walk is x_0 -> y_1 -> x_1 -> y_2 with answer bit 1. Families that
    cannot affect the walk hold self-intersecting singletons.
    """
    f = frozenset
    idont = [[f({i}) for i in range(3)]]  # identity singletons, one layer
    A = [
        [f({0, 1}), f({0, 1}), f({1})],
        idont[0],
        [f({1}), f({1, 2}), f({0})],
    ]
    B = [
        [f({1, 2}), f({0}), f({1, 2})],
        idont[0],
        [f({0, 1}), f({2}), f({0, 2})],
    ]
    C = [
        idont[0],
        [f({0}), f({0, 1}), f({2})],
        idont[0],
    ]
    D = [
        idont[0],
        [f({0, 1}), f({1, 2}), f({1, 2})],
        idont[0],
    ]
    return MHPCInstance(3, 3, A, B, C, D)


def pad_instance(inst: MHPCInstance, m_new: int) -> MHPCInstance:
    """Grow the universes to m_new with self-intersecting singleton pairs.

    The walk never reaches the new coordinates, so the path and answer
    are unchanged.
    """
    if m_new < inst.m:
        raise ValueError("cannot shrink the universe")
    pads = [frozenset({i}) for i in range(inst.m, m_new)]
    grow = lambda fam: [layer + pads for layer in fam]
    return MHPCInstance(
        m_new, inst.r,
        grow(inst.A), grow(inst.B), grow(inst.C), grow(inst.D),
    )


def instance_to_json(inst: MHPCInstance) -> str:
    dump = lambda fam: [[sorted(s) for s in layer] for layer in fam]
    return json.dumps(
        {"m": inst.m, "r": inst.r, "A": dump(inst.A), "B": dump(inst.B),
         "C": dump(inst.C), "D": dump(inst.D)},
        sort_keys=True, separators=(",", ":"),
    )


def instance_from_json(text: str) -> MHPCInstance:
    obj = json.loads(text)
    load = lambda fam: [[frozenset(s) for s in layer] for layer in fam]
    inst = MHPCInstance(
        obj["m"], obj["r"],
        load(obj["A"]), load(obj["B"]), load(obj["C"]), load(obj["D"]),
    )
    validate_instance(inst)
    return inst
