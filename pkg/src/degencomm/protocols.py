"""Two-party protocols that decide degeneracy <= k over a split edge set.

Alice holds one part of the edges, Bob the other, and they jointly simulate
the peeling algorithm. The expensive part is keeping degree information
consistent after deletions; the two protocols here differ in how lazily
they do that:

* ``degen_decide_sqrt`` re-exchanges all degrees every ceil(sqrt(n))
  deletions and tracks a single "low" band exactly in between.
* ``degen_decide_fast`` buckets vertices by their gap above k and only
  re-communicates a degree when one side's private count has dropped far
  enough to matter for that bucket.

Both always agree with the sequential peeling decision, and both return a
peel order on Accept and the surviving (k+1)-core on Reject.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Callable, Sequence

from .comm import (
    CommLedger,
    EdgePartition,
    lp_list,
    run_two_party,
    uint,
    vec,
    vertex_id,
)
from .graphs import Accept, Reject

Decision = Accept | Reject


def _ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _bucket_count(n: int) -> int:
    return max(1, (n - 1).bit_length())


def _bucket_index(gap: int, imax: int) -> int:
    """Bucket i holds gaps in [2^(i-1), 2^i); the top bucket absorbs the rest."""
    if gap < 1:
        raise ValueError("bucketed vertices must sit strictly above k")
    return min(gap.bit_length(), imax)


def _pick(ready: set[int], priority: Sequence[int] | None) -> int:
    if priority is None:
        return min(ready)
    return min(ready, key=lambda v: (priority[v], v))


def _swap(role, fld):
    """Exchange one field with the peer; Alice (role 0) talks first."""
    if role == 0:
        yield ("send", fld)
        return (yield ("recv",))
    got = yield ("recv",)
    yield ("send", fld)
    return got


# ---------------------------------------------------------------------------
# ceil(sqrt(n))-block protocol


def degen_decide_sqrt(part: EdgePartition, k: int,
                      priority: Sequence[int] | None = None,
                      stats: dict | None = None) -> tuple[Decision, CommLedger]:
    """Decide degeneracy <= k with full degree refreshes every sqrt(n) steps."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return run_two_party(
        _sqrt_party(0, part.adj_a, part.n, k, priority, stats),
        _sqrt_party(1, part.adj_b, part.n, k, priority, None),
    )


def _sqrt_party(role, adj, n, k, priority, stats):
    live = set(range(n))
    my_deg = [len(adj[u]) for u in range(n)]
    order: list[int] = []
    s = _ceil_sqrt(n)

    while live:
        lv = sorted(live)
        theirs = yield from _swap(role, vec(*(uint(my_deg[u], n) for u in lv)))
        deg = {u: my_deg[u] + d for u, d in zip(lv, theirs)}
        ready = {u for u in lv if deg[u] <= k}
        low = {u for u in lv if k + 1 <= deg[u] <= k + s}
        if stats is not None:
            stats.setdefault("blocks", []).append(
                {"safe": set(lv) - ready - low, "deleted": []}
            )

        for _ in range(s):
            if not live:
                break
            if not ready:
                yield ("output", Reject(frozenset(live)))
                return
            v = _pick(ready, priority)
            ready.discard(v)
            live.discard(v)
            order.append(v)
            if stats is not None:
                stats["blocks"][-1]["deleted"].append(v)
            for w in adj[v]:
                if w in live:
                    my_deg[w] -= 1
            mine = sorted(w for w in adj[v] if w in low)
            others = yield from _swap(
                role, lp_list([vertex_id(w, n) for w in mine], n)
            )
            for w in mine + list(others):
                deg[w] -= 1
                if deg[w] <= k:
                    low.discard(w)
                    ready.add(w)

    yield ("output", Accept(order))


# ---------------------------------------------------------------------------
# bucketed protocol


def degen_decide_fast(part: EdgePartition, k: int,
                      priority: Sequence[int] | None = None,
                      stats: dict | None = None) -> tuple[Decision, CommLedger]:
    """Decide degeneracy <= k with per-vertex lazy degree updates.

    ``stats``, when given, is filled with per-vertex degree re-communication
    counts ("updates_per_vertex" and their max).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    return run_two_party(
        _fast_party(0, part.adj_a, part.n, k, priority, stats),
        _fast_party(1, part.adj_b, part.n, k, priority, None),
    )


def _fast_party(role, adj, n, k, priority, stats):
    live = set(range(n))
    my_deg = [len(adj[u]) for u in range(n)]
    order: list[int] = []
    imax = _bucket_count(n)
    threshold = [0] + [max(1, 2 ** (i - 2)) for i in range(1, imax + 1)]
    updates: Counter[int] = Counter()

    lv = sorted(live)
    theirs = yield from _swap(role, vec(*(uint(my_deg[u], n) for u in lv)))
    deg = {u: my_deg[u] + d for u, d in zip(lv, theirs)}
    last_mine = {u: my_deg[u] for u in lv}
    ready = set()
    bucket: dict[int, int] = {}
    for u in lv:
        if deg[u] <= k:
            ready.add(u)
        else:
            bucket[u] = _bucket_index(deg[u] - k, imax)

    while live:
        if not ready:
            yield ("output", Reject(frozenset(live)))
            if stats is not None:
                _fill_update_stats(stats, updates, n)
            return
        v = _pick(ready, priority)
        ready.discard(v)
        live.discard(v)
        bucket.pop(v, None)
        order.append(v)
        for w in adj[v]:
            if w in live:
                my_deg[w] -= 1

        detected = sorted(
            u for u in adj[v]
            if u in bucket and last_mine[u] - my_deg[u] >= threshold[bucket[u]]
        )
        pairs = lp_list(
            [vec(vertex_id(u, n), uint(my_deg[u], n)) for u in detected], n
        )
        if role == 0:
            reply = yield from _swap(role, pairs)
            their_halves, their_extra = reply
            known = {u: (my_deg[u], half)
                     for u, half in zip(detected, their_halves)}
            for u, half in their_extra:
                known[u] = (my_deg[u], half)
            yield ("send", vec(*(uint(my_deg[u], n) for u, _ in their_extra)))
        else:
            their_pairs = yield ("recv",)
            known = {u: (half, my_deg[u]) for u, half in their_pairs}
            extra = [u for u in detected if u not in known]
            yield ("send", vec(
                vec(*(uint(my_deg[u], n) for u, _ in their_pairs)),
                lp_list([vec(vertex_id(u, n), uint(my_deg[u], n))
                         for u in extra], n),
            ))
            their_halves = yield ("recv",)
            for u, half in zip(extra, their_halves):
                known[u] = (half, my_deg[u])

        for u, (a_half, b_half) in known.items():
            deg[u] = a_half + b_half
            last_mine[u] = my_deg[u]
            updates[u] += 1
            del bucket[u]
            if deg[u] <= k:
                ready.add(u)
            else:
                bucket[u] = _bucket_index(deg[u] - k, imax)

    yield ("output", Accept(order))
    if stats is not None:
        _fill_update_stats(stats, updates, n)


def _fill_update_stats(stats, updates, n):
    stats["updates_per_vertex"] = dict(updates)
    stats["updates_max"] = max(updates.values(), default=0)


# ---------------------------------------------------------------------------
# binary-search wrapper


def degen_search(part: EdgePartition,
                 decide: Callable[..., tuple[Decision, CommLedger]] = degen_decide_fast,
                 priority: Sequence[int] | None = None,
                 stats: dict | None = None,
                 ) -> tuple[int, list[int], frozenset[int], CommLedger]:
    """Binary-search the smallest accepted k; return kappa with witnesses.

    The ordering comes from the accepting run at k = kappa and the core from
    the rejecting run at k = kappa - 1 (the whole vertex set when kappa = 0).
    """
    n = part.n
    total = CommLedger()
    probes: list[tuple[int, str]] = []
    if n == 0:
        if stats is not None:
            stats["decisions"] = probes
        return 0, [], frozenset(), total

    def probe(k):
        out, led = decide(part, k, priority=priority)
        total.merge(led)
        probes.append((k, "accept" if isinstance(out, Accept) else "reject"))
        return out

    lo, hi = 0, n - 1
    best_accept: tuple[int, list[int]] | None = None
    best_reject: tuple[int, frozenset[int]] | None = None
    while lo < hi:
        mid = (lo + hi) // 2
        out = probe(mid)
        if isinstance(out, Accept):
            hi = mid
            best_accept = (mid, out.ordering)
        else:
            lo = mid + 1
            best_reject = (mid, out.core)

    kappa = lo
    if best_accept is None or best_accept[0] != kappa:
        out = probe(kappa)
        assert isinstance(out, Accept)
        best_accept = (kappa, out.ordering)
    if kappa == 0:
        core = frozenset(range(n))
    else:
        assert best_reject is not None and best_reject[0] == kappa - 1
        core = best_reject[1]
    if stats is not None:
        stats["decisions"] = probes
    return kappa, best_accept[1], core, total
