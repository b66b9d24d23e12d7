"""Central-coordinator spectrum-sharing decisions.

For every potential primary link and every AC-cycle slot, the coordinator
compares the primary's tonemap against each node-disjoint candidate secondary
link: subcarriers where the candidate's modulation beats the primary's by at
least ``beta`` bits are eligible to be handed over, and the candidate's gain
is the modulation total it would add on those subcarriers minus what the
primary would give up. Candidates with positive gain are ranked by gain and
the best ``top_m`` are retained.

Decisions are a pure function of (deployment, policy): node-order tie-breaks
make the table deterministic, and per-slot decisions are independent.
"""

import io
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Sequence, Tuple

from .tonemap import SUBCARRIER_COUNT, DirectedLink
from .traceio import Deployment


@dataclass(frozen=True)
class SSPolicy:
    """Spectrum-sharing policy knobs.

    beta                minimum per-subcarrier advantage (bits) for a
                        subcarrier to be shareable
    top_m               how many ranked secondary candidates to retain
    max_share_fraction  cap on the fraction of the 917 subcarriers a primary
                        may hand away per slot (1.0 = no cap)
    """

    beta: int = 2
    top_m: int = 1
    max_share_fraction: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.top_m < 1:
            raise ValueError("top_m must be >= 1")
        if not 0.0 <= self.max_share_fraction <= 1.0:
            raise ValueError("max_share_fraction must be in [0, 1]")


@dataclass(frozen=True)
class SSAllocation:
    """One ranked secondary candidate for a (primary link, slot) pair."""

    primary: DirectedLink
    secondary: DirectedLink
    slot: int
    shared_indices: Tuple[int, ...]  # ascending 1-based subcarrier indices
    gain: int
    rank: int

    def __post_init__(self):
        if {self.secondary.tx, self.secondary.rx} & {self.primary.tx, self.primary.rx}:
            raise ValueError(
                f"secondary {self.secondary} shares a node with primary {self.primary}"
            )
        if self.gain <= 0:
            raise ValueError("retained candidates must have positive gain")
        if self.rank < 1:
            raise ValueError("rank is 1-based")


@dataclass(frozen=True)
class SSDecisionTable:
    """Ranked candidate lists keyed by (primary link, 1-based slot)."""

    entries: Dict[Tuple[DirectedLink, int], Tuple[SSAllocation, ...]]

    def __init__(self, entries):
        object.__setattr__(self, "entries", dict(entries))

    def candidates(self, primary: DirectedLink, slot: int) -> Tuple[SSAllocation, ...]:
        return self.entries.get((primary, slot), ())

    def __repr__(self) -> str:
        populated = sum(1 for v in self.entries.values() if v)
        return f"SSDecisionTable(entries={len(self.entries)}, populated={populated})"


def diff_vector(primary_map: Sequence[int], secondary_map: Sequence[int]) -> Tuple[int, ...]:
    """Element-wise secondary-minus-primary modulation difference."""
    if len(primary_map) != SUBCARRIER_COUNT or len(secondary_map) != SUBCARRIER_COUNT:
        raise ValueError(
            f"length mismatch: expected two vectors of {SUBCARRIER_COUNT}, "
            f"got {len(primary_map)} and {len(secondary_map)}"
        )
    return tuple(s - p for p, s in zip(primary_map, secondary_map))


def eligible_indices(diff: Sequence[int], beta: int) -> FrozenSet[int]:
    """1-based indices whose difference is at least ``beta`` (inclusive)."""
    return frozenset(j for j, d in enumerate(diff, start=1) if d >= beta)


def gain(primary_map: Sequence[int], secondary_map: Sequence[int], indices) -> int:
    """Modulation total the secondary adds minus what the primary gives up."""
    total = 0
    for j in indices:
        if not 1 <= j <= SUBCARRIER_COUNT:
            raise ValueError(f"subcarrier index {j} out of range 1..{SUBCARRIER_COUNT}")
        total += secondary_map[j - 1] - primary_map[j - 1]
    return total


def build_decision_table(deployment: Deployment, policy: SSPolicy) -> SSDecisionTable:
    """Rank secondary candidates for every (primary link, slot) of a deployment.

    For each node-disjoint candidate link the eligible subcarriers come from
    the beta rule; if they exceed the share cap the smallest-difference ones
    are dropped first (ties toward keeping lower indices). Candidates with
    positive gain are sorted by descending gain, ties by the secondary's
    (tx, rx), and truncated to ``top_m``.
    """
    cap = int(policy.max_share_fraction * SUBCARRIER_COUNT)
    entries: Dict[Tuple[DirectedLink, int], Tuple[SSAllocation, ...]] = {}
    links = sorted(deployment.links)
    for primary in links:
        p_tonemap = deployment.links[primary]
        for slot in range(1, deployment.slot_count + 1):
            p_vec = p_tonemap.slot(slot)
            scored: List[Tuple[int, DirectedLink, Tuple[int, ...]]] = []
            for secondary in links:
                if {secondary.tx, secondary.rx} & {primary.tx, primary.rx}:
                    continue
                s_vec = deployment.links[secondary].slot(slot)
                diff = diff_vector(p_vec, s_vec)
                kept = sorted(eligible_indices(diff, policy.beta))
                if len(kept) > cap:
                    # keep the highest-difference subcarriers under the cap
                    by_value = sorted(kept, key=lambda j: (-diff[j - 1], j))
                    kept = sorted(by_value[:cap])
                g = sum(diff[j - 1] for j in kept)
                if g > 0:
                    scored.append((g, secondary, tuple(kept)))
            scored.sort(key=lambda item: (-item[0], item[1]))
            entries[(primary, slot)] = tuple(
                SSAllocation(primary, secondary, slot, indices, g, rank)
                for rank, (g, secondary, indices) in enumerate(
                    scored[: policy.top_m], start=1
                )
            )
    return SSDecisionTable(entries)


def decision_table_csv(table: SSDecisionTable) -> str:
    """Debug CSV of a decision table, one row per retained candidate.

    Columns: primary_tx,primary_rx,slot,rank,secondary_tx,secondary_rx,gain,
    num_shared, then the shared indices in ascending order.
    """
    out = io.StringIO()
    out.write(
        "primary_tx,primary_rx,slot,rank,secondary_tx,secondary_rx,gain,num_shared,indices\n"
    )
    for (primary, slot), allocations in sorted(
        table.entries.items(), key=lambda kv: (kv[0][0], kv[0][1])
    ):
        for alloc in allocations:
            row = [
                primary.tx,
                primary.rx,
                str(slot),
                str(alloc.rank),
                alloc.secondary.tx,
                alloc.secondary.rx,
                str(alloc.gain),
                str(len(alloc.shared_indices)),
            ]
            row.extend(str(j) for j in alloc.shared_indices)
            out.write(",".join(row) + "\n")
    return out.getvalue()
