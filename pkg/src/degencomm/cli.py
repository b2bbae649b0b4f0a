"""Batch experiment runner tying the library together behind one command.

Five subcommands, one per experiment family:

* ``degeneracy``: two-party degeneracy search sweeps over random edge
  splits, cross-checked against sequential peeling (and, on small
  graphs, the exhaustive oracle); or a single decision on a graph file.
* ``reduction``: gadget build plus answer-split and peel-trace audits
  over sampled instances; optionally replays a streaming algorithm
  through the bounded-pass harness or exports the gadgets to disk.
* ``hpc``: four-party pointer-walk protocol sweeps, aligned or
  misaligned with pre-solving.
* ``info``: randomized checks of the information-measure toolbox.
* ``sisolver``: amplification trials for synthetic reveal solvers.

Every subcommand is deterministic given ``--seed``: trial i runs on an
independent generator seeded by sha256("{seed}:{i}"), so reruns produce
byte-identical output whether trials run serially (the default) or on a
process pool capped by the ``DEGENCOMM_WORKERS`` environment variable.
Output goes to stdout or ``--out``, as JSON (everything) or CSV (the
documented column subsets below).

CSV columns by subcommand:

* degeneracy sweep: n, kappa, bits_total, updates_max
* degeneracy single decision: n, k, accept, bits_total, updates_max
* reduction sweep: m, r, bit_true, kappa, d, split_ok, trace_ok
* reduction streaming: m, r, n, p, bit_true, bit, phases,
  max_state_bits, bits_total, ok
* hpc: mode, m, r, presolve, trials, finished, correct, success_rate
* info: trials, violations
* sisolver: m, p, gamma, eps, k_rounds, tau, trials, success,
  success_rate, overflow, empty_intersection

Exit codes: 0 when every check in the run passed, 1 when some check
failed, 2 on usage, configuration, or file-format errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from .comm import RoundSchedule, random_partition
from .gadget import build_gadget, load_gadget, save_gadget
from .graphs import (
    Accept,
    brute_force_degeneracy,
    degeneracy,
    gnm_random_graph,
    load_graph,
    peel_decision,
)
from .hpc import (
    Abstain,
    aligned_protocol,
    chase,
    misaligned_bhpc_protocol,
    sample_bhpc,
    sample_bmhpc,
)
from .info import (
    conditional_mutual_information,
    entropy,
    mutual_information,
    triangular_discrimination,
    tvd,
)
from .protocols import degen_decide_fast, degen_search
from .reduction import NaivePeeler, StoreAllDecider, full_report, simulate_streaming_reduction
from .sisolver import make_reveal_solver, reveal_lambda, solver_experiment


def spawn_seed(master: int, index: int) -> int:
    """Derive an independent 64-bit seed for trial ``index``."""
    digest = hashlib.sha256(f"{master}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def _worker_count() -> int:
    raw = os.environ.get("DEGENCOMM_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"DEGENCOMM_WORKERS must be an integer, got {raw!r}")
    return max(1, workers)


def _run_trials(fn, tasks):
    workers = _worker_count()
    if workers == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _emit(payload: dict, rows: list[dict], columns: list[str], args) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])
        text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# degeneracy


def _degeneracy_trial(task: tuple[int, int]) -> dict:
    n, seed = task
    rng = random.Random(seed)
    cap = min(n * (n - 1) // 2, 4 * n)
    g = gnm_random_graph(n, rng.randint(0, cap), rng)
    part = random_partition(g, rng)
    kappa, order, core, ledger = degen_search(part)
    stats: dict = {}
    degen_decide_fast(part, kappa, stats=stats)
    ok = kappa == degeneracy(g)
    if ok and n <= 12:
        ok = kappa == brute_force_degeneracy(g)
    return {
        "n": n,
        "kappa": kappa,
        "bits_total": ledger.bits_total,
        "updates_max": stats["updates_max"],
        "ok": ok,
    }


def cmd_degeneracy(args) -> int:
    if args.graph is not None:
        if args.k is None:
            raise ValueError("--graph needs --k to decide against")
        g = load_graph(args.graph)
        part = random_partition(g, random.Random(spawn_seed(args.seed, 0)))
        stats: dict = {}
        out, ledger = degen_decide_fast(part, args.k, stats=stats)
        accept = isinstance(out, Accept)
        ok = accept == isinstance(peel_decision(g, args.k), Accept)
        rows = [{
            "n": g.n,
            "k": args.k,
            "accept": accept,
            "bits_total": ledger.bits_total,
            "updates_max": stats["updates_max"],
            "ok": ok,
        }]
        columns = ["n", "k", "accept", "bits_total", "updates_max"]
    else:
        tasks = [(args.n, spawn_seed(args.seed, i)) for i in range(args.trials)]
        rows = _run_trials(_degeneracy_trial, tasks)
        columns = ["n", "kappa", "bits_total", "updates_max"]
    ok = all(r["ok"] for r in rows)
    payload = {
        "command": "degeneracy",
        "seed": args.seed,
        "rows": rows,
        "ok": ok,
    }
    _emit(payload, rows, columns, args)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# reduction


def _reduction_trial(task: tuple[int, int, int, str | None]) -> dict:
    m, r, seed, emit_dir = task
    rng = random.Random(seed)
    inst = sample_bmhpc(m, r, rng)
    rep = full_report(inst)
    row = {
        "m": m,
        "r": r,
        "bit_true": rep.bit_true,
        "kappa": rep.kappa,
        "d": rep.d,
        "split_ok": rep.split_ok,
        "trace_ok": all(rec.ok for rec in rep.trace),
    }
    if emit_dir is not None:
        gg = build_gadget(inst)
        path = os.path.join(emit_dir, f"gadget_m{m}_r{r}_{seed:016x}.txt")
        save_gadget(gg, path)
        reloaded = load_gadget(path)
        row["gadget_file"] = path
        row["reload_ok"] = (
            sorted(reloaded.graph.edges()) == sorted(gg.graph.edges())
            and reloaded.labels == gg.labels
        )
    row["ok"] = row["split_ok"] and row["trace_ok"] and row.get("reload_ok", True)
    return row


def _streaming_trial(task: tuple[int, int, int, str, int | None]) -> dict:
    m, r, seed, algname, budget = task
    rng = random.Random(seed)
    inst = sample_bmhpc(m, r, rng)
    n = 3 * m * (2 * r + 1) + 3 + (6 * m * r + 3 * m)
    if budget is None:
        budget = 1 if algname == "store-all" else n
    alg = StoreAllDecider() if algname == "store-all" else NaivePeeler()
    sim = simulate_streaming_reduction(inst, alg, budget)
    bit_true = chase(inst).bit
    return {
        "m": m,
        "r": r,
        "n": n,
        "p": budget,
        "bit_true": bit_true,
        "bit": sim.bit,
        "phases": sim.phases,
        "max_state_bits": sim.max_state_bits,
        "bits_total": sim.ledger.bits_total,
        "ok": sim.bit == bit_true,
    }


def cmd_reduction(args) -> int:
    if args.emit_gadget is not None:
        os.makedirs(args.emit_gadget, exist_ok=True)
    if args.streaming is not None:
        budget = None if args.p == "auto" else int(args.p)
        tasks = [
            (args.m, args.r, spawn_seed(args.seed, i), args.streaming, budget)
            for i in range(args.trials)
        ]
        rows = _run_trials(_streaming_trial, tasks)
        columns = ["m", "r", "n", "p", "bit_true", "bit", "phases",
                   "max_state_bits", "bits_total", "ok"]
    else:
        tasks = [
            (args.m, args.r, spawn_seed(args.seed, i), args.emit_gadget)
            for i in range(args.trials)
        ]
        rows = _run_trials(_reduction_trial, tasks)
        columns = ["m", "r", "bit_true", "kappa", "d", "split_ok", "trace_ok"]
    ok = all(r["ok"] for r in rows)
    payload = {
        "command": "reduction",
        "seed": args.seed,
        "rows": rows,
        "ok": ok,
    }
    _emit(payload, rows, columns, args)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# hpc


def _hpc_trial(task: tuple[int, int, bool, int, int]) -> dict:
    m, r, misaligned, presolve, seed = task
    rng = random.Random(seed)
    if misaligned:
        inst = sample_bhpc(m, r, rng)
        out, ledger = misaligned_bhpc_protocol(inst, presolve, rng)
    else:
        inst = sample_bmhpc(m, r, rng)
        out, ledger = aligned_protocol(inst, RoundSchedule(r, "AB"))
    finished = not isinstance(out, Abstain)
    return {
        "finished": finished,
        "correct": finished and out == chase(inst).bit,
        "bits_total": ledger.bits_total,
    }


def cmd_hpc(args) -> int:
    tasks = [
        (args.m, args.r, args.misaligned, args.N, spawn_seed(args.seed, i))
        for i in range(args.trials)
    ]
    outcomes = _run_trials(_hpc_trial, tasks)
    finished = sum(1 for o in outcomes if o["finished"])
    correct = sum(1 for o in outcomes if o["correct"])
    summary = {
        "mode": "misaligned" if args.misaligned else "aligned",
        "m": args.m,
        "r": args.r,
        "presolve": args.N if args.misaligned else 0,
        "trials": args.trials,
        "finished": finished,
        "correct": correct,
        "success_rate": correct / args.trials,
        "bits_total_max": max(o["bits_total"] for o in outcomes),
    }
    # A finished walk must be right; abstaining is the only excuse.
    ok = all(o["correct"] for o in outcomes if o["finished"])
    payload = {
        "command": "hpc",
        "seed": args.seed,
        "summary": summary,
        "ok": ok,
    }
    columns = ["mode", "m", "r", "presolve", "trials", "finished",
               "correct", "success_rate"]
    _emit(payload, [summary], columns, args)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# info


def _random_distribution(rng: random.Random, size: int) -> list[float]:
    weights = [rng.random() for _ in range(size)]
    if rng.random() < 0.3:
        keep = rng.randint(1, size)
        for i in rng.sample(range(size), size - keep):
            weights[i] = 0.0
    total = sum(weights)
    if total == 0.0:
        return [1.0 / size] * size
    return [w / total for w in weights]


def _info_trial(seed: int) -> int:
    rng = random.Random(seed)
    violations = 0
    size = rng.randint(2, 8)
    mu = _random_distribution(rng, size)
    nu = _random_distribution(rng, size)
    lam = triangular_discrimination(mu, nu)
    if not 0.0 <= lam <= tvd(mu, nu) + 1e-12:
        violations += 1

    na, nb = rng.randint(2, 5), rng.randint(2, 5)
    pa = _random_distribution(rng, na)
    pb = _random_distribution(rng, nb)
    if rng.random() < 0.25:
        table = [[pa[a] * pb[b] for b in range(nb)] for a in range(na)]
        if abs(mutual_information(table)) > 1e-9:
            violations += 1
    else:
        cells = _random_distribution(rng, na * nb)
        table = [cells[a * nb:(a + 1) * nb] for a in range(na)]
        mi = mutual_information(table)
        row = [sum(table[a]) for a in range(na)]
        col = [sum(table[a][b] for a in range(na)) for b in range(nb)]
        if not -1e-12 <= mi <= min(entropy(row), entropy(col)) + 1e-9:
            violations += 1

    nc = rng.randint(2, 3)
    cells3 = _random_distribution(rng, na * nb * nc)
    cube = [[[cells3[(a * nb + b) * nc + c] for c in range(nc)]
             for b in range(nb)] for a in range(na)]
    if conditional_mutual_information(cube) < -1e-12:
        violations += 1
    return violations


def cmd_info(args) -> int:
    tasks = [spawn_seed(args.seed, i) for i in range(args.fuzz_lambda)]
    violations = sum(_run_trials(_info_trial, tasks))
    summary = {"trials": args.fuzz_lambda, "violations": violations}
    payload = {
        "command": "info",
        "seed": args.seed,
        "summary": summary,
        "ok": violations == 0,
    }
    _emit(payload, [summary], ["trials", "violations"], args)
    return 0 if violations == 0 else 1


# ---------------------------------------------------------------------------
# sisolver


def cmd_sisolver(args) -> int:
    eps = args.eps if args.eps is not None else reveal_lambda(args.p, args.m)
    rng = random.Random(spawn_seed(args.seed, 0))
    solver = make_reveal_solver(args.p)
    result = solver_experiment(solver, eps, args.m, args.gamma, args.trials, rng)
    rate = result["success"] / args.trials
    payload = {
        "command": "sisolver",
        "seed": args.seed,
        "p": args.p,
        "result": result,
        "success_rate": rate,
        "ok": args.min_success is None or rate >= args.min_success,
    }
    flat = {
        "m": args.m,
        "p": args.p,
        "gamma": args.gamma,
        "eps": eps,
        "k_rounds": result["k_rounds"],
        "tau": result["tau"],
        "trials": args.trials,
        "success": result["success"],
        "success_rate": rate,
        "overflow": result["failure_kind"]["overflow"],
        "empty_intersection": result["failure_kind"]["empty-intersection"],
    }
    columns = ["m", "p", "gamma", "eps", "k_rounds", "tau", "trials",
               "success", "success_rate", "overflow", "empty_intersection"]
    _emit(payload, [flat], columns, args)
    return 0 if payload["ok"] else 1


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(sp) -> None:
    sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    sp.add_argument("--out", default=None, help="output file (default stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degencomm",
        description="experiment sweeps over degeneracy protocols and their gadgets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("degeneracy", help="two-party degeneracy search sweeps")
    sp.add_argument("--n", type=int, default=32, help="vertices per random graph")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--graph", default=None, help="decide one graph file instead")
    sp.add_argument("--k", type=int, default=None, help="decision threshold for --graph")
    _add_common(sp)
    sp.set_defaults(fn=cmd_degeneracy)

    sp = sub.add_parser("reduction", help="gadget build and audit sweeps")
    sp.add_argument("--m", type=int, default=4)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--emit-gadget", default=None, metavar="DIR",
                    help="write each gadget (and its label sidecar) here")
    sp.add_argument("--streaming", choices=("naive", "store-all"), default=None,
                    help="replay this reference algorithm through the harness")
    sp.add_argument("--p", default="auto",
                    help="pass budget for --streaming, or 'auto'")
    _add_common(sp)
    sp.set_defaults(fn=cmd_reduction)

    sp = sub.add_parser("hpc", help="four-party pointer-walk sweeps")
    sp.add_argument("--m", type=int, default=16)
    sp.add_argument("--r", type=int, default=3)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--misaligned", action="store_true",
                    help="wrong pair opens; rescued by pre-solving")
    sp.add_argument("--N", type=int, default=0,
                    help="pre-solved coordinates for --misaligned")
    _add_common(sp)
    sp.set_defaults(fn=cmd_hpc)

    sp = sub.add_parser("info", help="randomized information-measure checks")
    sp.add_argument("--fuzz-lambda", type=int, default=1000, metavar="TRIALS")
    _add_common(sp)
    sp.set_defaults(fn=cmd_info)

    sp = sub.add_parser("sisolver", help="amplification trials for reveal solvers")
    sp.add_argument("--p", type=float, default=0.5, help="reveal probability")
    sp.add_argument("--m", type=int, default=64)
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--eps", type=float, default=None,
                    help="claimed advantage (default: the solver's closed form)")
    sp.add_argument("--min-success", type=float, default=None,
                    help="fail the run when the success rate lands below this")
    _add_common(sp)
    sp.set_defaults(fn=cmd_sisolver)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"degencomm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
