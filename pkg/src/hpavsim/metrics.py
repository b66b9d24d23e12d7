"""Fairness and comparison metrics over simulation reports.

Per-node throughput is the sum of normalized throughputs of the flows a node
transmits. Jain's index is (sum x)^2 / (n * sum x^2); the fairly-shared
spectrum efficiency (FSSE) is n times the minimum per-node throughput, which
equals the network total exactly when allocation is perfectly even and is
anchored to the worst-off node otherwise.
"""

import io
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

from .macsim import MacParams, SimReportRaw, normalized_throughput
from .tonemap import MAX_MODULATION_TOTAL, DirectedLink, asymmetry
from .traceio import Deployment


def jain_index(values: Sequence[float]) -> float:
    """Jain's fairness index of non-negative scores; 1.0 iff all equal."""
    if not values:
        raise ValueError("jain_index needs at least one value")
    if any(v < 0 for v in values):
        raise ValueError("jain_index requires non-negative values")
    square_sum = sum(v * v for v in values)
    if square_sum == 0:
        raise ValueError("jain_index requires at least one positive value")
    total = sum(values)
    return (total * total) / (len(values) * square_sum)


def fsse(per_node: Dict[str, float]) -> float:
    """Fairly-shared spectrum efficiency: node count times the minimum."""
    if not per_node:
        raise ValueError("fsse needs a non-empty map")
    return len(per_node) * min(per_node.values())


@dataclass(frozen=True)
class FairnessReport:
    jfi: float
    fsse: float
    per_node_throughput: Dict[str, float]
    aggregate_throughput: float


def fairness_report(report: SimReportRaw, mac: MacParams) -> FairnessReport:
    """Node-level fairness figures of one run."""
    per_node: Dict[str, float] = {}
    for link in report.tallies:
        thr = normalized_throughput(report, link, mac)
        per_node[link.tx] = per_node.get(link.tx, 0.0) + thr
    return FairnessReport(
        jfi=jain_index(list(per_node.values())),
        fsse=fsse(per_node),
        per_node_throughput=per_node,
        aggregate_throughput=sum(per_node.values()),
    )


def fairness_csv(report: FairnessReport) -> str:
    out = io.StringIO()
    out.write("metric,value\n")
    out.write(f"jfi,{report.jfi!r}\n")
    out.write(f"fsse,{report.fsse!r}\n")
    out.write(f"aggregate_throughput,{report.aggregate_throughput!r}\n")
    for node in sorted(report.per_node_throughput):
        out.write(f"throughput_{node},{report.per_node_throughput[node]!r}\n")
    return out.getvalue()


@dataclass(frozen=True)
class LinkGain:
    base: float
    ss: float
    gain_pct: float


@dataclass(frozen=True)
class GainReport:
    """SS-on vs SS-off comparison of two runs over the same scenario."""

    per_link: Dict[DirectedLink, LinkGain]
    aggregate_base: float
    aggregate_ss: float
    aggregate_gain_pct: float
    jfi_base: float
    jfi_ss: float
    jfi_delta: float
    fsse_base: float
    fsse_ss: float
    fsse_delta: float


def _pct_gain(base: float, new: float) -> float:
    if base == 0:
        return 0.0 if new == 0 else math.inf
    return 100.0 * (new - base) / base


def compare_runs(base: SimReportRaw, ss: SimReportRaw, mac: MacParams) -> GainReport:
    """Percentage throughput gains and fairness deltas of SS-on over SS-off."""
    if set(base.tallies) != set(ss.tallies):
        raise ValueError("link-set mismatch between the two reports")
    if base.requested_duration_us != ss.requested_duration_us:
        raise ValueError("reports were produced for different durations")
    per_link = {}
    for link in sorted(base.tallies):
        thr_base = normalized_throughput(base, link, mac)
        thr_ss = normalized_throughput(ss, link, mac)
        per_link[link] = LinkGain(thr_base, thr_ss, _pct_gain(thr_base, thr_ss))
    fair_base = fairness_report(base, mac)
    fair_ss = fairness_report(ss, mac)
    return GainReport(
        per_link=per_link,
        aggregate_base=fair_base.aggregate_throughput,
        aggregate_ss=fair_ss.aggregate_throughput,
        aggregate_gain_pct=_pct_gain(
            fair_base.aggregate_throughput, fair_ss.aggregate_throughput
        ),
        jfi_base=fair_base.jfi,
        jfi_ss=fair_ss.jfi,
        jfi_delta=fair_ss.jfi - fair_base.jfi,
        fsse_base=fair_base.fsse,
        fsse_ss=fair_ss.fsse,
        fsse_delta=fair_ss.fsse - fair_base.fsse,
    )


def gain_summary_csv(report: GainReport) -> str:
    out = io.StringIO()
    out.write("metric,value\n")
    for name in (
        "aggregate_base", "aggregate_ss", "aggregate_gain_pct",
        "jfi_base", "jfi_ss", "jfi_delta",
        "fsse_base", "fsse_ss", "fsse_delta",
    ):
        out.write(f"{name},{getattr(report, name)!r}\n")
    return out.getvalue()


def gain_links_csv(report: GainReport) -> str:
    out = io.StringIO()
    out.write("link_tx,link_rx,base,ss,gain_pct\n")
    for link in sorted(report.per_link):
        g = report.per_link[link]
        out.write(f"{link.tx},{link.rx},{g.base!r},{g.ss!r},{g.gain_pct!r}\n")
    return out.getvalue()


def asymmetry_distribution(deployment: Deployment) -> List[float]:
    """Normalized (0..1) asymmetry of every traced unordered node pair,
    ordered by pair identifiers."""
    pairs = sorted({tuple(sorted((l.tx, l.rx))) for l in deployment.links})
    values = []
    for a, b in pairs:
        forward = deployment.links.get(DirectedLink(a, b))
        backward = deployment.links.get(DirectedLink(b, a))
        if forward is None or backward is None:
            raise ValueError(f"missing reverse link for pair {a}-{b}")
        values.append(float(asymmetry(forward, backward) / MAX_MODULATION_TOTAL))
    return values


def stability_std(series: Sequence[float], window: int) -> List[float]:
    """Population standard deviation over consecutive non-overlapping windows.

    A trailing partial window is ignored.
    """
    if window < 2:
        raise ValueError("window must be >= 2 samples")
    if len(series) < window:
        raise ValueError("series shorter than one window")
    out = []
    for start in range(0, len(series) - window + 1, window):
        chunk = series[start : start + window]
        mean = sum(chunk) / window
        out.append(math.sqrt(sum((x - mean) ** 2 for x in chunk) / window))
    return out
