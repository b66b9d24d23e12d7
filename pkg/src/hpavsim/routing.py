"""Offline multi-hop route planner over tonemap-derived link rates.

Edges are weighted by expected throughput; a path's end-to-end estimate is
the harmonic combination 1 / sum(1/rate) of its hop rates, i.e. transmission
time is additive because every hop shares the one PLC medium. The planner
returns the path maximizing that estimate, with ties broken toward the
lexicographically smallest node sequence.
"""

import heapq
import math
from dataclasses import dataclass
from typing import Dict, Tuple

from .tonemap import DirectedLink, PhyParams, expected_throughput
from .traceio import Deployment


@dataclass(frozen=True)
class LinkGraph:
    nodes: Tuple[str, ...]
    edges: Dict[DirectedLink, float]  # bits/second

    def __init__(self, nodes, edges):
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "edges", dict(edges))


@dataclass(frozen=True)
class Route:
    path: Tuple[str, ...]
    throughput_bps: float

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def build_graph(
    deployment: Deployment, params: PhyParams, min_rate: float = 0.0
) -> LinkGraph:
    """Directed graph of all traced links whose expected throughput reaches
    ``min_rate``."""
    edges = {}
    for link, tmap in deployment.links.items():
        rate = expected_throughput(tmap, params)
        if rate >= min_rate:
            edges[link] = rate
    return LinkGraph(deployment.nodes, edges)


def best_route(graph: LinkGraph, src: str, dst: str) -> Route:
    """Highest-throughput path from src to dst.

    Dijkstra over per-bit transmission time (1/rate per hop); zero-rate edges
    are usable only when nothing better exists and yield a 0.0 estimate.
    Raises ValueError for unknown endpoints, src == dst, or no path.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    if src not in graph.nodes or dst not in graph.nodes:
        missing = src if src not in graph.nodes else dst
        raise ValueError(f"unknown node {missing!r}")

    adjacency: Dict[str, list] = {}
    for link, rate in graph.edges.items():
        cost = math.inf if rate == 0 else 1.0 / rate
        adjacency.setdefault(link.tx, []).append((link.rx, cost))

    # heap orders by (cost, path); the path tuple makes equal-cost ties
    # resolve to the lexicographically smallest node sequence
    heap = [(0.0, (src,))]
    settled = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == dst:
            return Route(path, 0.0 if cost == math.inf or cost == 0 else 1.0 / cost)
        for neighbor, hop_cost in adjacency.get(node, ()):
            if neighbor not in settled:
                heapq.heappush(heap, (cost + hop_cost, path + (neighbor,)))
    raise ValueError(f"destination {dst!r} unreachable from {src!r}")


def route_csv(route: Route, src: str, dst: str) -> str:
    """Single-row route CSV: src,dst,hops,path,estimate_bps."""
    path = ">".join(route.path)
    return (
        "src,dst,hops,path,estimate_bps\n"
        f"{src},{dst},{route.hops},{path},{round(route.throughput_bps)}\n"
    )
