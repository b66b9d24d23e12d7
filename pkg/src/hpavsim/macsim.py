"""Slot-based discrete-event simulator of the HomePlug AV CSMA/CA MAC, with
the coordinator-driven spectrum-sharing (SS) extension.

Global contention
-----------------
Every transmitting station holds (backoff stage, backoff counter BC, deferral
counter DC). Each idle slot decrements BC; a station whose BC is 0 at a slot
boundary transmits. When the medium turns busy, each backing-off station
handles one sensed-busy event: with DC = 0 it advances a stage (capped),
redraws BC uniform over [0, CW-1] and reloads DC; otherwise it spends one DC
and its BC stays frozen for the busy period. Two or more simultaneous
transmitters collide (medium busy for the collision duration, colliders
advance a stage); a single transmitter succeeds (medium busy for the success
duration, transmitter resets to stage 0). Stations are saturated: there is
always a next frame for the fixed flow target.

Spectrum sharing
----------------
When a decision table is supplied and exactly one transmission (the P-Link)
is in progress, the window runs the SS mechanism:

* The transmission announces its link; the ranked secondary candidates whose
  links carry a configured flow wait rank * rank_wait_slots_per_rank slots,
  then the first one engages: it transmits on its allocated subcarriers until
  the window closes and is tallied as one secondary success. The remaining
  candidates fall into an independent shared-band CSMA instance (fresh stage-0
  draws from a dedicated RNG stream, same CW/DC schedules).
* The primary's spectrum fraction for the window excludes the indices granted
  to whoever engaged; with no engagement it keeps the full spectrum.
* A station whose global BC sits at 0 during an SS window (possible only via
  a stage-escalation redraw when the window opened) claims the full spectrum
  at the next slot boundary: an engaged S-Link aborts first (its in-flight
  frame is lost and tallied as neither success nor collision), then the new
  attempt collides with the P-Link per the normal rules. Without SS such a
  station simply waits for the medium to go idle.
* When reeval_period_us is set, one P-Link transmission per period runs with
  SS suspended (full-spectrum, no secondary), modeling the periodic
  full-spectrum re-evaluation; tonemaps are static in a run, so the
  suspension is pure opportunity cost.

The AC-line-cycle slot of a window (selecting the per-slot tonemap and table
entry) is the sub-interval of ac_cycle_us containing the window's start.

Determinism: a run is a pure function of its arguments. All randomness comes
from two splitmix64 streams (stream 0: global contention, stream 1: secondary
contention), stations are processed in node-identifier order everywhere, and
simultaneous events are emitted in that same order.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import io

from .rng import SplitMix64
from .sharing import SSAllocation, SSDecisionTable, SSPolicy
from .tonemap import SUBCARRIER_COUNT, DirectedLink, spectrum_fraction
from .traceio import Deployment

EVENT_TX_START = "tx_start"
EVENT_TX_END_SUCCESS = "tx_end_success"
EVENT_TX_END_COLLISION = "tx_end_collision"
EVENT_STAGE_ADVANCE = "stage_advance"
EVENT_SS_ENGAGE = "ss_engage"
EVENT_SS_ABORT = "ss_abort"
EVENT_REEVAL_START = "reeval_start"
EVENT_REEVAL_END = "reeval_end"

ROLE_PRIMARY = "primary"
ROLE_SECONDARY = "secondary"

MODE_GLOBAL = "global-contention"
MODE_PRIMARY_ACTIVE = "primary-active"
MODE_SECONDARY_CANDIDATE = "secondary-candidate"
MODE_SECONDARY_CONTENDING = "secondary-contending"
MODE_SECONDARY_ACTIVE = "secondary-active"

_ALL_SUBCARRIERS = tuple(range(1, SUBCARRIER_COUNT + 1))


@dataclass(frozen=True)
class MacParams:
    """MAC timing constants and schedules; defaults follow HPAV CSMA/CA.

    frame_length is the unitless multiplier of the normalized-throughput
    formula. reeval_period_us None disables periodic full-spectrum
    re-evaluation. ac_cycle_us is the mains cycle (60 Hz USA) carved into the
    deployment's slot_count equal sub-intervals.
    """

    collision_duration_us: float = 2920.64
    success_duration_us: float = 2542.64
    frame_length: float = 2050.0
    cw_schedule: Tuple[int, ...] = (8, 16, 32, 64)
    dc_schedule: Tuple[int, ...] = (0, 1, 3, 15)
    slot_duration_us: float = 35.84
    rank_wait_slots_per_rank: int = 1
    reeval_period_us: Optional[float] = None
    ac_cycle_us: float = 16666.67

    def __post_init__(self):
        object.__setattr__(self, "cw_schedule", tuple(self.cw_schedule))
        object.__setattr__(self, "dc_schedule", tuple(self.dc_schedule))
        if len(self.cw_schedule) != len(self.dc_schedule) or not self.cw_schedule:
            raise ValueError("cw_schedule and dc_schedule need equal length >= 1")
        if any(cw < 1 for cw in self.cw_schedule):
            raise ValueError("contention windows must be >= 1")
        if any(dc < 0 for dc in self.dc_schedule):
            raise ValueError("deferral counters must be >= 0")
        for name in ("collision_duration_us", "success_duration_us", "frame_length",
                     "slot_duration_us", "ac_cycle_us"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.rank_wait_slots_per_rank < 0:
            raise ValueError("rank_wait_slots_per_rank must be >= 0")
        if self.reeval_period_us is not None and self.reeval_period_us <= 0:
            raise ValueError("reeval_period_us must be positive or None")


@dataclass
class StationState:
    """Mutable per-station contention state."""

    node: str
    target: str  # saturated flow destination
    stage: int = 0
    bc: int = 0
    dc: int = 0
    mode: str = MODE_GLOBAL

    @property
    def link(self) -> DirectedLink:
        return DirectedLink(self.node, self.target)


@dataclass
class LinkTally:
    """Raw per-link counters accumulated by a run."""

    successes_primary: int = 0
    successes_secondary: int = 0
    collisions: int = 0
    sf_primary: Fraction = Fraction(0)
    sf_secondary: Fraction = Fraction(0)

    @property
    def successes(self) -> int:
        return self.successes_primary + self.successes_secondary

    @property
    def sf_total(self) -> Fraction:
        return self.sf_primary + self.sf_secondary


@dataclass(frozen=True)
class SimEvent:
    time_us: float
    event: str
    node: Optional[str] = None
    link: Optional[DirectedLink] = None
    role: Optional[str] = None
    stage: Optional[int] = None
    bc: Optional[int] = None
    dc: Optional[int] = None
    spectrum_fraction: Optional[float] = None


@dataclass
class SimReportRaw:
    """Raw tallies of one run; input to the metrics layer."""

    tallies: Dict[DirectedLink, LinkTally]
    total_sim_time_us: float
    requested_duration_us: float
    idle_us: float
    busy_us: float
    events: Optional[List[SimEvent]] = None


class _Candidate:
    """Window-local secondary-side state for one table allocation."""

    __slots__ = ("alloc", "station", "phase", "stage", "bc", "dc")

    WAITING = 0
    CONTENDING = 1
    ACTIVE = 2

    def __init__(self, alloc: SSAllocation, station: StationState):
        self.alloc = alloc
        self.station = station
        self.phase = _Candidate.WAITING
        self.stage = 0
        self.bc = 0
        self.dc = 0


class _Engine:
    def __init__(
        self,
        deployment: Deployment,
        table: Optional[SSDecisionTable],
        mac: MacParams,
        policy: Optional[SSPolicy],
        flows: Sequence[DirectedLink],
        duration_us: float,
        seed: int,
        collect_events: bool,
    ):
        if not flows:
            raise ValueError("empty flow list")
        if duration_us < 0:
            raise ValueError("duration_us must be >= 0")
        seen_tx = set()
        for flow in flows:
            if flow not in deployment.links:
                raise ValueError(f"flow over missing link {flow}")
            if flow.tx in seen_tx:
                raise ValueError(f"station {flow.tx!r} has more than one flow")
            seen_tx.add(flow.tx)
        self.deployment = deployment
        self.table = table
        self.mac = mac
        self.policy = policy
        self.duration_us = float(duration_us)
        self.global_rng = SplitMix64(seed, 0)
        self.secondary_rng = SplitMix64(seed, 1)
        self.stations = [
            StationState(node=f.tx, target=f.rx)
            for f in sorted(flows, key=lambda f: f.tx)
        ]
        for s in self.stations:
            s.stage = 0
            s.dc = mac.dc_schedule[0]
            s.bc = self.global_rng.randbelow(mac.cw_schedule[0])
        self.station_by_link = {s.link: s for s in self.stations}
        self.tallies = {s.link: LinkTally() for s in self.stations}
        self.events: Optional[List[SimEvent]] = [] if collect_events else None
        self.t = 0.0
        self.idle_us = 0.0
        self.busy_us = 0.0
        self.next_reeval = (
            mac.reeval_period_us
            if (table is not None and mac.reeval_period_us is not None)
            else None
        )

    # -- helpers -----------------------------------------------------------

    def _emit(self, **kwargs) -> None:
        if self.events is not None:
            self.events.append(SimEvent(**kwargs))

    def _sense_busy(self, transmitting: Sequence[StationState], now: float) -> None:
        """One sensed-busy event for every station not transmitting."""
        busy = set(id(s) for s in transmitting)
        for s in self.stations:
            if id(s) in busy:
                continue
            if s.dc == 0:
                s.stage = min(s.stage + 1, len(self.mac.cw_schedule) - 1)
                s.bc = self.global_rng.randbelow(self.mac.cw_schedule[s.stage])
                s.dc = self.mac.dc_schedule[s.stage]
                self._emit(
                    time_us=now, event=EVENT_STAGE_ADVANCE, node=s.node, link=s.link,
                    stage=s.stage, bc=s.bc, dc=s.dc,
                )
            else:
                s.dc -= 1  # BC stays frozen for this busy period

    def _finish_collision(
        self, colliders: List[StationState], window_start: float, busy_until: float
    ) -> None:
        colliders = sorted(colliders, key=lambda s: s.node)
        for s in colliders:
            self.tallies[s.link].collisions += 1
            self._emit(
                time_us=busy_until, event=EVENT_TX_END_COLLISION, node=s.node,
                link=s.link, role=ROLE_PRIMARY, stage=s.stage, bc=s.bc, dc=s.dc,
            )
        for s in colliders:
            s.stage = min(s.stage + 1, len(self.mac.cw_schedule) - 1)
            s.bc = self.global_rng.randbelow(self.mac.cw_schedule[s.stage])
            s.dc = self.mac.dc_schedule[s.stage]
            s.mode = MODE_GLOBAL
            self._emit(
                time_us=busy_until, event=EVENT_STAGE_ADVANCE, node=s.node,
                link=s.link, stage=s.stage, bc=s.bc, dc=s.dc,
            )
        self.busy_us += busy_until - window_start
        self.t = busy_until

    def _ac_slot(self, now: float) -> int:
        width = self.mac.ac_cycle_us / self.deployment.slot_count
        k = 1 + int((now % self.mac.ac_cycle_us) / width)
        return min(k, self.deployment.slot_count)

    # -- window handlers ---------------------------------------------------

    def _collision_window(self, ready: List[StationState]) -> None:
        start = self.t
        for s in sorted(ready, key=lambda s: s.node):
            s.mode = MODE_PRIMARY_ACTIVE
            self._emit(
                time_us=start, event=EVENT_TX_START, node=s.node, link=s.link,
                role=ROLE_PRIMARY, stage=s.stage, bc=s.bc, dc=s.dc,
            )
        self._sense_busy(ready, start)
        self._finish_collision(ready, start, start + self.mac.collision_duration_us)

    def _success_window(self, tx: StationState) -> None:
        mac = self.mac
        start = self.t
        end = start + mac.success_duration_us
        p_link = tx.link
        k = self._ac_slot(start)

        reeval = self.next_reeval is not None and start >= self.next_reeval
        if reeval:
            self.next_reeval = start + mac.reeval_period_us
            self._emit(time_us=start, event=EVENT_REEVAL_START)
        ss_on = self.table is not None and not reeval

        tx.mode = MODE_PRIMARY_ACTIVE
        self._emit(
            time_us=start, event=EVENT_TX_START, node=tx.node, link=p_link,
            role=ROLE_PRIMARY, stage=tx.stage, bc=tx.bc, dc=tx.dc,
        )
        self._sense_busy([tx], start)

        candidates: List[_Candidate] = []
        if ss_on:
            allocations = self.table.candidates(p_link, k)
            if self.policy is not None:
                allocations = allocations[: self.policy.top_m]
            for alloc in allocations:
                station = self.station_by_link.get(alloc.secondary)
                if station is not None:  # only flow-backed candidates can engage
                    cand = _Candidate(alloc, station)
                    station.mode = MODE_SECONDARY_CANDIDATE
                    candidates.append(cand)

        engaged: Optional[_Candidate] = None
        shared_union: set = set()
        aborted = False
        slot_us = mac.slot_duration_us
        wait = mac.rank_wait_slots_per_rank
        i = 1
        while ss_on and start + i * slot_us < end:
            boundary = start + i * slot_us
            # shared-band transitions first, then global BC expiry (so an
            # expiring candidate aborts an in-flight frame, its own included)
            if engaged is None:
                eligible = [
                    c for c in candidates
                    if (c.phase == _Candidate.WAITING and i >= c.alloc.rank * wait)
                    or (c.phase == _Candidate.CONTENDING and c.bc == 0)
                ]
                if eligible:
                    engaged = min(
                        eligible,
                        key=lambda c: (c.alloc.secondary.tx, c.alloc.secondary.rx),
                    )
                    engaged.phase = _Candidate.ACTIVE
                    engaged.station.mode = MODE_SECONDARY_ACTIVE
                    shared_union.update(engaged.alloc.shared_indices)
                    self._emit(
                        time_us=boundary, event=EVENT_SS_ENGAGE,
                        node=engaged.station.node, link=engaged.alloc.secondary,
                        role=ROLE_SECONDARY,
                    )
                    for c in candidates:
                        if c.phase == _Candidate.WAITING:
                            c.phase = _Candidate.CONTENDING
                            c.stage = 0
                            c.bc = self.secondary_rng.randbelow(mac.cw_schedule[0])
                            c.dc = mac.dc_schedule[0]
                            c.station.mode = MODE_SECONDARY_CONTENDING
                else:
                    for c in candidates:
                        if c.phase == _Candidate.CONTENDING and c.bc > 0:
                            c.bc -= 1  # shared band idle, secondary backoff runs
            bargers = [s for s in self.stations if s is not tx and s.bc == 0]
            if bargers:
                if engaged is not None:
                    # in-flight secondary frame is lost: neither success nor collision
                    self._emit(
                        time_us=boundary, event=EVENT_SS_ABORT,
                        node=engaged.station.node, link=engaged.alloc.secondary,
                        role=ROLE_SECONDARY,
                    )
                for s in sorted(bargers, key=lambda s: s.node):
                    s.mode = MODE_PRIMARY_ACTIVE
                    self._emit(
                        time_us=boundary, event=EVENT_TX_START, node=s.node,
                        link=s.link, role=ROLE_PRIMARY, stage=s.stage, bc=s.bc, dc=s.dc,
                    )
                for c in candidates:
                    c.station.mode = MODE_GLOBAL
                self._finish_collision(
                    [tx] + bargers, start, boundary + mac.collision_duration_us
                )
                aborted = True
                break
            if engaged is not None or not candidates:
                # frozen shared band and no possible BC expiry: nothing else
                # can happen until the window closes
                break
            i += 1

        if aborted:
            return

        if engaged is not None:
            s_link = engaged.alloc.secondary
            s_sf = spectrum_fraction(
                self.deployment.links[s_link], k, engaged.alloc.shared_indices
            )
            tally = self.tallies[s_link]
            tally.successes_secondary += 1
            tally.sf_secondary += s_sf
            self._emit(
                time_us=end, event=EVENT_TX_END_SUCCESS, node=engaged.station.node,
                link=s_link, role=ROLE_SECONDARY, spectrum_fraction=float(s_sf),
            )
        for c in candidates:
            c.station.mode = MODE_GLOBAL

        p_active = (
            _ALL_SUBCARRIERS
            if not shared_union
            else [j for j in _ALL_SUBCARRIERS if j not in shared_union]
        )
        p_sf = spectrum_fraction(self.deployment.links[p_link], k, p_active)
        tally = self.tallies[p_link]
        tally.successes_primary += 1
        tally.sf_primary += p_sf
        # saturated: the transmitter resets to stage 0 and redraws for the
        # next frame at the moment its transmission completes
        tx.stage = 0
        tx.bc = self.global_rng.randbelow(mac.cw_schedule[0])
        tx.dc = mac.dc_schedule[0]
        tx.mode = MODE_GLOBAL
        self._emit(
            time_us=end, event=EVENT_TX_END_SUCCESS, node=tx.node, link=p_link,
            role=ROLE_PRIMARY, stage=tx.stage, bc=tx.bc, dc=tx.dc,
            spectrum_fraction=float(p_sf),
        )
        if reeval:
            self._emit(time_us=end, event=EVENT_REEVAL_END)
        self.busy_us += end - start
        self.t = end

    # -- main loop ---------------------------------------------------------

    def run(self) -> SimReportRaw:
        slot_us = self.mac.slot_duration_us
        while self.t < self.duration_us:
            ready = [s for s in self.stations if s.bc == 0]
            if not ready:
                for s in self.stations:
                    s.bc -= 1
                self.t += slot_us
                self.idle_us += slot_us
            elif len(ready) == 1:
                self._success_window(ready[0])
            else:
                self._collision_window(ready)
        return SimReportRaw(
            tallies=self.tallies,
            total_sim_time_us=self.t,
            requested_duration_us=self.duration_us,
            idle_us=self.idle_us,
            busy_us=self.busy_us,
            events=self.events,
        )


def run_simulation(
    deployment: Deployment,
    table: Optional[SSDecisionTable],
    mac: MacParams,
    policy: Optional[SSPolicy],
    flows: Sequence[DirectedLink],
    duration_us: float,
    seed: int,
    collect_events: bool = False,
) -> SimReportRaw:
    """Simulate saturated flows over one collision domain.

    With ``table`` None the run is plain HPAV CSMA/CA; otherwise the SS
    mechanism applies. The result is a pure function of the arguments
    (`seed` included); independent runs may execute concurrently.

    A window that starts before ``duration_us`` runs to completion, so
    ``total_sim_time_us`` in the report may exceed the request by up to one
    busy period; all throughput figures normalize by the actual total.
    """
    return _Engine(
        deployment, table, mac, policy, flows, duration_us, seed, collect_events
    ).run()


def normalized_throughput(report: SimReportRaw, link: DirectedLink, mac: MacParams) -> float:
    """100 * (sum of success spectrum fractions) * frame_length / total time."""
    if link not in report.tallies:
        raise ValueError(f"unknown link {link}")
    if report.total_sim_time_us == 0:
        return 0.0
    tally = report.tallies[link]
    return 100.0 * float(tally.sf_total) * mac.frame_length / report.total_sim_time_us


def event_log_csv(report: SimReportRaw) -> str:
    """Event log as CSV; requires the run to have collected events."""
    if report.events is None:
        raise ValueError("run_simulation(collect_events=True) required for an event log")
    out = io.StringIO()
    out.write("time_us,event,node,link_tx,link_rx,role,stage,bc,dc,spectrum_fraction\n")
    for e in report.events:
        out.write(
            ",".join(
                [
                    repr(e.time_us),
                    e.event,
                    e.node or "",
                    e.link.tx if e.link else "",
                    e.link.rx if e.link else "",
                    e.role or "",
                    "" if e.stage is None else str(e.stage),
                    "" if e.bc is None else str(e.bc),
                    "" if e.dc is None else str(e.dc),
                    "" if e.spectrum_fraction is None else repr(e.spectrum_fraction),
                ]
            )
            + "\n"
        )
    return out.getvalue()
