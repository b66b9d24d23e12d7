import pytest

from hpavsim import Deployment, DirectedLink, Tonemap
from hpavsim.tonemap import SUBCARRIER_COUNT


def deployment_from_levels(levels, slot_count=5, nodes=None):
    """Build a deployment from {(tx, rx): flat modulation level} pairs."""
    links = {
        DirectedLink(tx, rx): Tonemap.filled(level, slot_count)
        for (tx, rx), level in levels.items()
    }
    if nodes is None:
        nodes = sorted({n for pair in levels for n in pair})
    return Deployment(nodes, links)


def brute_force_table(deployment, policy):
    """Independent enumeration of every node-disjoint pair and the beta rule."""
    cap = int(policy.max_share_fraction * SUBCARRIER_COUNT)
    table = {}
    links = sorted(deployment.links)
    for primary in links:
        for slot in range(1, deployment.slot_count + 1):
            p = deployment.links[primary].slot(slot)
            rows = []
            for secondary in links:
                if secondary.tx in (primary.tx, primary.rx):
                    continue
                if secondary.rx in (primary.tx, primary.rx):
                    continue
                s = deployment.links[secondary].slot(slot)
                indices = [
                    j for j in range(1, SUBCARRIER_COUNT + 1)
                    if s[j - 1] - p[j - 1] >= policy.beta
                ]
                indices.sort(key=lambda j: (-(s[j - 1] - p[j - 1]), j))
                indices = sorted(indices[:cap])
                g = sum(s[j - 1] - p[j - 1] for j in indices)
                if g > 0:
                    rows.append((-g, secondary.tx, secondary.rx, tuple(indices)))
            rows.sort()
            table[(primary, slot)] = tuple(
                (DirectedLink(tx, rx), -neg_g, idx)
                for neg_g, tx, rx, idx in rows[: policy.top_m]
            )
    return table


def tables_equal(table, oracle):
    if set(table.entries) != set(oracle):
        return False
    for key, allocations in table.entries.items():
        expected = oracle[key]
        if len(allocations) != len(expected):
            return False
        for alloc, (secondary, g, indices) in zip(allocations, expected):
            if (alloc.secondary, alloc.gain, alloc.shared_indices) != (
                secondary, g, indices,
            ):
                return False
    return True


@pytest.fixture
def two_node_deployment():
    return deployment_from_levels({("n1", "n2"): 10, ("n2", "n1"): 10})


# Shared scenario for the spectrum-sharing acceptance corpus: 4 nodes on the
# complementary profile, ring-cross saturated flows so every primary link has
# exactly one node-disjoint flow-backed secondary candidate.
CORPUS_SEEDS = tuple(range(1, 11))
CORPUS_FLOWS = (
    DirectedLink("n1", "n3"),
    DirectedLink("n3", "n2"),
    DirectedLink("n2", "n4"),
    DirectedLink("n4", "n1"),
)
CORPUS_PROFILE_KW = dict(
    profile_kind="complementary", base_quality=6.0, asymmetry_noise=2
)
CORPUS_DURATION_US = 1_000_000
CORPUS_BETAS = (2, 4, 6, 8)
CORPUS_TOP_M = 2
