"""Relay-subset selection: exhaustive oracle, recursive search, baseline.

Three selectors over the 2^N subsets of the relay pool:

* ``brute_force_select``: builds every rate matrix from scratch and solves it
  (the reference oracle).
* ``recursive_select``: depth-first walk of the subset tree where each child
  subset appends one relay with a larger index.  The child's inverse, slot
  vector, and rate are obtained from the parent's in O(p^2) via the
  partitioned-inverse update, and subtrees are skipped once an inherited slot
  duration goes nonpositive.
* ``equal_time_select``: optimal subset choice under uniform slot durations
  (the non-optimized cooperation baseline).

All three break rate ties in favor of fewer relays, then the
lexicographically smallest subset.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .allocator import (
    SINGULARITY_TOL,
    TIME_TOL,
    AllocationResult,
    RejectReason,
    SingularMatrix,
    TimeAllocation,
    allocate,
)
from .rate_model import LinkCapacityMatrix, RelaySubset, build_rate_matrix, mutual_informations

# Two rates within this absolute-plus-relative distance are tied.
RATE_TIE_TOL = 1e-9


class NoFeasibleSolution(Exception):
    """No subset (not even direct transmission) supports a positive rate."""


@dataclass(frozen=True)
class OptimizationOutcome:
    best: AllocationResult
    candidates_evaluated: int
    candidates_pruned: int
    op_count_reported: int


@dataclass(frozen=True)
class InverseBlocks:
    """Inverse of one subset's rate matrix in extendable partitioned form.

    ``chain_inv`` inverts the leading p x p block (the decode chain); it is
    what a child extension actually consumes.  ``dest_row`` is the last row
    of the full inverse, or None when the last relay has no destination link
    (the full matrix is singular but extensions may still be viable).
    ``u_chain`` caches chain_inv @ 1, the unnormalized slot solution shared
    with every descendant.
    """

    subset: tuple[int, ...]
    chain_inv: np.ndarray
    dest_row: np.ndarray | None
    u_chain: np.ndarray

    @property
    def full_inverse(self) -> np.ndarray:
        if self.dest_row is None:
            raise SingularMatrix(f"subset {self.subset} has a singular rate matrix")
        p = len(self.subset)
        inv = np.zeros((p + 1, p + 1))
        inv[:p, :p] = self.chain_inv
        inv[p, :] = self.dest_row
        return inv


def root_blocks(caps: LinkCapacityMatrix) -> InverseBlocks:
    """Blocks for the empty subset: a 1x1 system holding the direct link."""
    lsd = caps.direct_capacity
    dest_row = np.array([1.0 / lsd]) if lsd > SINGULARITY_TOL else None
    return InverseBlocks(
        subset=(), chain_inv=np.zeros((0, 0)), dest_row=dest_row, u_chain=np.zeros(0)
    )


def _extend_blocks(
    parent: InverseBlocks, a: np.ndarray, dest: int, new_relay: int
) -> InverseBlocks | None:
    """Partitioned-inverse update appending ``new_relay`` to the parent subset.

    Returns None when the decode-chain link into the new relay is absent
    (every descendant shares that link, so the whole subtree is singular).
    A missing new-relay-to-destination link only nulls ``dest_row``.
    """
    sub = parent.subset
    p = len(sub)
    last = sub[-1] if sub else 0
    t11 = a[last, new_relay]
    if t11 <= SINGULARITY_TOL:
        return None
    t22 = a[new_relay, dest]
    t21 = a[last, dest]

    # slot transmitters covered by the parent chain block: source then all
    # parent relays but the last (whose slot belongs to the appended rows)
    tx = np.array((0, *sub[:-1]), dtype=np.intp) if sub else np.empty(0, dtype=np.intp)
    f_new = a[tx, new_relay]
    fb_new = f_new @ parent.chain_inv  # O(p^2)

    chain_inv = np.zeros((p + 1, p + 1))
    chain_inv[:p, :p] = parent.chain_inv
    chain_inv[p, :p] = -fb_new / t11
    chain_inv[p, p] = 1.0 / t11

    u_chain = np.empty(p + 1)
    u_chain[:p] = parent.u_chain
    u_chain[p] = (1.0 - fb_new.sum()) / t11

    if t22 <= SINGULARITY_TOL:
        dest_row = None
    else:
        f_dest = a[tx, dest]
        fb_dest = f_dest @ parent.chain_inv
        dest_row = np.empty(p + 2)
        dest_row[:p] = (t21 / (t11 * t22)) * fb_new - fb_dest / t22
        dest_row[p] = -t21 / (t11 * t22)
        dest_row[p + 1] = 1.0 / t22

    return InverseBlocks(
        subset=(*sub, new_relay), chain_inv=chain_inv, dest_row=dest_row, u_chain=u_chain
    )


def extend_inverse(
    parent: InverseBlocks, caps: LinkCapacityMatrix, new_relay: int
) -> InverseBlocks:
    """Extend a cached inverse by one relay of larger index.

    Raises SingularMatrix when either new diagonal entry (chain link into the
    new relay, or its destination link) is absent.
    """
    if parent.subset and new_relay <= parent.subset[-1]:
        raise ValueError(
            f"new relay {new_relay} must exceed all of {parent.subset}"
        )
    if not 1 <= new_relay <= caps.n_relays:
        raise ValueError(f"relay index {new_relay} outside pool 1..{caps.n_relays}")
    child = _extend_blocks(parent, caps.caps, caps.destination, new_relay)
    if child is None or child.dest_row is None:
        raise SingularMatrix(
            f"subset {(*parent.subset, new_relay)} has a zero diagonal entry"
        )
    return child


def extend_solution(blocks: InverseBlocks) -> tuple[TimeAllocation, float]:
    """Slot durations and achievable rate straight from cached inverse blocks.

    Equivalent to a fresh solve of the subset's rate matrix: the first p
    entries are the parent's unnormalized solution rescaled by the new rate,
    the last two entries come from the appended block rows.
    """
    if blocks.dest_row is None:
        raise SingularMatrix(f"subset {blocks.subset} has a singular rate matrix")
    u = np.append(blocks.u_chain, blocks.dest_row.sum())
    s = u.sum()
    if s == 0.0:
        raise ValueError("slot solution sums to zero; no normalizable allocation")
    t = u / s
    return TimeAllocation(t / t.sum()), 1.0 / s


def _allocation_from_blocks(blocks: InverseBlocks) -> AllocationResult:
    """Feasibility verdict for one tree node, mirroring allocator.allocate."""
    subset = RelaySubset(blocks.subset)
    if blocks.dest_row is None:
        return AllocationResult(
            subset=subset, times=None, rate=None, feasible=False,
            reject_reason=RejectReason.SINGULAR,
        )
    u = np.append(blocks.u_chain, blocks.dest_row.sum())
    s = u.sum()
    if s <= 0.0:
        times = None
        if s != 0.0:
            t = u / s
            times = TimeAllocation(t / t.sum())
        return AllocationResult(
            subset=subset, times=times, rate=1.0 / s if s != 0.0 else None,
            feasible=False, reject_reason=RejectReason.NEGATIVE_RATE,
        )
    rate = 1.0 / s
    t = u / s
    t = t / t.sum()
    bad = np.nonzero(t <= TIME_TOL)[0]
    if bad.size:
        return AllocationResult(
            subset=subset, times=TimeAllocation(t), rate=rate, feasible=False,
            reject_reason=RejectReason.NONPOSITIVE_TIME, reject_index=int(bad[0]),
        )
    return AllocationResult(
        subset=subset, times=TimeAllocation(t), rate=rate, feasible=True
    )


def _beats(rate_new: float, sub_new: tuple, rate_old: float, sub_old: tuple | None) -> bool:
    """Tie-tolerant comparison: higher rate wins; ties prefer fewer relays, then lex order."""
    if sub_old is None:
        return True
    tol = RATE_TIE_TOL * max(1.0, abs(rate_new), abs(rate_old))
    if rate_new > rate_old + tol:
        return True
    if rate_new < rate_old - tol:
        return False
    return (len(sub_new), sub_new) < (len(sub_old), sub_old)


def subsets_by_size(n_relays: int):
    """All relay subsets in (size, lexicographic) order, empty set first."""
    for m in range(n_relays + 1):
        yield from itertools.combinations(range(1, n_relays + 1), m)


def brute_force_select(caps: LinkCapacityMatrix) -> OptimizationOutcome:
    """Exhaustive oracle: fresh rate matrix and solve for every subset."""
    best: AllocationResult | None = None
    ops = 0
    count = 0
    for sub in subsets_by_size(caps.n_relays):
        count += 1
        if sub:
            ops += op_count(len(sub))
        result = allocate(build_rate_matrix(caps, RelaySubset(sub)), RelaySubset(sub))
        if result.feasible and _beats(
            result.rate, sub, best.rate if best else 0.0, best.subset.indices if best else None
        ):
            best = result
    if best is None:
        raise NoFeasibleSolution("no relay subset nor direct transmission is feasible")
    return OptimizationOutcome(
        best=best, candidates_evaluated=count, candidates_pruned=0, op_count_reported=ops
    )


def recursive_select(
    caps: LinkCapacityMatrix, trace: list | None = None
) -> OptimizationOutcome:
    """Depth-first incremental search, equivalent to brute_force_select.

    Children of a subset append one relay beyond its largest index; each
    child reuses the parent's cached inverse blocks.  When any of the first
    p-1 slot durations of a p-relay subset is nonpositive, every descendant
    inherits that slot, so the subtree is skipped.  A broken decode-chain
    link likewise kills the subtree; a missing last-relay-to-destination
    link only rejects the node itself.

    ``trace``, if given, collects (subset, result, blocks) triples for every
    node visited.
    """
    n = caps.n_relays
    a = caps.caps
    dest = caps.destination
    evaluated = 0
    pruned = 0
    ops = 0
    best: AllocationResult | None = None

    def consider(result: AllocationResult) -> None:
        nonlocal best
        if result.feasible and _beats(
            result.rate,
            result.subset.indices,
            best.rate if best else 0.0,
            best.subset.indices if best else None,
        ):
            best = result

    def visit(blocks: InverseBlocks) -> None:
        nonlocal evaluated, pruned, ops
        start = blocks.subset[-1] + 1 if blocks.subset else 1
        for j in range(start, n + 1):
            evaluated += 1
            child = _extend_blocks(blocks, a, dest, j)
            if child is None:
                # chain link into relay j is absent: every descendant is singular
                pruned += (1 << (n - j)) - 1
                if trace is not None:
                    trace.append(((*blocks.subset, j), None, None))
                continue
            ops += op_count(len(child.subset))
            result = _allocation_from_blocks(child)
            if trace is not None:
                trace.append((child.subset, result, child))
            consider(result)
            p = len(child.subset)
            if (
                result.times is not None
                and p >= 2
                and np.any(result.times.t[: p - 1] <= 0.0)
            ):
                pruned += (1 << (n - j)) - 1
                continue
            visit(child)

    root = root_blocks(caps)
    evaluated += 1
    root_result = _allocation_from_blocks(root)
    if trace is not None:
        trace.append(((), root_result, root))
    consider(root_result)
    visit(root)

    if best is None:
        raise NoFeasibleSolution("no relay subset nor direct transmission is feasible")
    return OptimizationOutcome(
        best=best, candidates_evaluated=evaluated, candidates_pruned=pruned,
        op_count_reported=ops,
    )


def equal_time_select(caps: LinkCapacityMatrix) -> OptimizationOutcome:
    """Best subset under uniform slot durations t_i = 1/(m+1).

    No equalizing system is solved; each subset's rate is the minimum mutual
    information over its receivers.  Always returns an outcome (the empty
    subset is a candidate whatever the channels).
    """
    best_rate = -np.inf
    best_sub: tuple | None = None
    best_times: TimeAllocation | None = None
    count = 0
    for sub in subsets_by_size(caps.n_relays):
        count += 1
        rm = build_rate_matrix(caps, RelaySubset(sub))
        m = len(sub)
        t = np.full(m + 1, 1.0 / (m + 1))
        rate = float(mutual_informations(rm, t).min())
        if _beats(rate, sub, best_rate, best_sub):
            best_rate = rate
            best_sub = sub
            best_times = TimeAllocation(t)
    best = AllocationResult(
        subset=RelaySubset(best_sub), times=best_times, rate=best_rate, feasible=True
    )
    return OptimizationOutcome(
        best=best, candidates_evaluated=count, candidates_pruned=0, op_count_reported=0
    )


def op_count(q: int) -> int:
    """Scalar operations charged to one q-relay step of the recursive search."""
    if q < 1:
        raise ValueError(f"op_count is defined for q >= 1, got {q}")
    return 3 * q * q + 6 * q + 8


def worst_case_ops(n_relays: int) -> int:
    """Worst-case operation total over all nonempty subsets of the pool."""
    if n_relays < 1:
        raise ValueError(f"need at least one relay, got {n_relays}")
    return sum(math.comb(n_relays, q) * op_count(q) for q in range(1, n_relays + 1))


# ---------------------------------------------------------------------------
# Batched enumeration over many fading realizations at once.
#
# The Monte Carlo harness evaluates the same subset lattice for thousands of
# independent capacity draws; doing it one realization at a time would be
# dominated by Python overhead.  These helpers run the brute-force oracle
# with the trial axis vectorized.  Per-trial arithmetic is identical to the
# scalar path, so results do not depend on how trials are batched.
# ---------------------------------------------------------------------------


def batch_optimized(caps_batch: np.ndarray) -> dict[str, np.ndarray]:
    """Optimal-subset rate and statistics for a stack of capacity matrices.

    Parameters
    ----------
    caps_batch : (T, N+2, N+2) array of link capacities.

    Returns
    -------
    dict with per-trial arrays: ``rate``, ``n_active``, ``best_id`` (index
    into ``subsets_by_size`` order), and reject counters ``n_singular``,
    ``n_negative_rate``, ``n_nonpositive_time``.
    """
    caps_batch = np.asarray(caps_batch, dtype=float)
    n_trials, n, _ = caps_batch.shape
    n_relays = n - 2
    dest = n - 1

    best_rate = np.full(n_trials, -np.inf)
    best_size = np.zeros(n_trials, dtype=np.int64)
    best_id = np.full(n_trials, -1, dtype=np.int64)
    n_sing = np.zeros(n_trials, dtype=np.int64)
    n_neg = np.zeros(n_trials, dtype=np.int64)
    n_bad_t = np.zeros(n_trials, dtype=np.int64)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for sid, sub in enumerate(subsets_by_size(n_relays)):
            m = len(sub)
            tx = np.array((0, *sub))
            rx = np.array((*sub, dest))
            rm = caps_batch[:, tx[:, None], rx[None, :]].transpose(0, 2, 1)
            diag = np.einsum("tii->ti", rm)
            singular = (diag <= SINGULARITY_TOL).any(axis=1)
            u = np.empty((n_trials, m + 1))
            for i in range(m + 1):
                acc = np.einsum("tj,tj->t", rm[:, i, :i], u[:, :i]) if i else 0.0
                u[:, i] = (1.0 - acc) / diag[:, i]
            s = u.sum(axis=1)
            negative = ~singular & (s <= 0.0)
            t = u / s[:, None]
            bad_time = ~singular & ~negative & (t.min(axis=1) <= TIME_TOL)
            feasible = ~singular & ~negative & ~bad_time
            n_sing += singular
            n_neg += negative
            n_bad_t += bad_time

            rate = np.where(feasible, 1.0 / s, -np.inf)
            tol = RATE_TIE_TOL * np.maximum(
                1.0,
                np.maximum(
                    np.where(np.isfinite(best_rate), np.abs(best_rate), 0.0),
                    np.where(np.isfinite(rate), np.abs(rate), 0.0),
                ),
            )
            take = rate > best_rate + tol
            best_rate = np.where(take, rate, best_rate)
            best_size = np.where(take, m, best_size)
            best_id = np.where(take, sid, best_id)

    if np.any(best_id < 0):
        bad = int(np.nonzero(best_id < 0)[0][0])
        raise NoFeasibleSolution(f"trial {bad} has no feasible subset")
    return {
        "rate": best_rate,
        "n_active": best_size,
        "best_id": best_id,
        "n_singular": n_sing,
        "n_negative_rate": n_neg,
        "n_nonpositive_time": n_bad_t,
    }


def batch_equal_time(caps_batch: np.ndarray) -> dict[str, np.ndarray]:
    """Equal-time baseline rate and subset size for a stack of capacity matrices."""
    caps_batch = np.asarray(caps_batch, dtype=float)
    n_trials, n, _ = caps_batch.shape
    n_relays = n - 2
    dest = n - 1

    best_rate = np.full(n_trials, -np.inf)
    best_size = np.zeros(n_trials, dtype=np.int64)
    best_id = np.full(n_trials, -1, dtype=np.int64)
    for sid, sub in enumerate(subsets_by_size(n_relays)):
        m = len(sub)
        tx = np.array((0, *sub))
        rx = np.array((*sub, dest))
        rm = caps_batch[:, tx[:, None], rx[None, :]].transpose(0, 2, 1)
        rm = rm * np.tri(m + 1)
        rate = rm.sum(axis=2).min(axis=1) / (m + 1)
        tol = RATE_TIE_TOL * np.maximum(
            1.0,
            np.maximum(
                np.where(np.isfinite(best_rate), np.abs(best_rate), 0.0), np.abs(rate)
            ),
        )
        take = rate > best_rate + tol
        best_rate = np.where(take, rate, best_rate)
        best_size = np.where(take, m, best_size)
        best_id = np.where(take, sid, best_id)
    return {"rate": best_rate, "n_active": best_size, "best_id": best_id}
