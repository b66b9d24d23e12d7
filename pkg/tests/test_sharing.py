import pytest

from hpavsim import (
    DirectedLink,
    GeneratorProfile,
    SSPolicy,
    build_decision_table,
    diff_vector,
    eligible_indices,
    gain,
    generate_deployment,
)
from hpavsim.rng import SplitMix64
from hpavsim.sharing import SSAllocation, decision_table_csv
from hpavsim.tonemap import SUBCARRIER_COUNT

from conftest import brute_force_table, deployment_from_levels, tables_equal


def vec(*head, fill=0):
    return tuple(head) + (fill,) * (SUBCARRIER_COUNT - len(head))


class TestDiffVector:
    def test_identical_vectors(self):
        v = vec(5, 5, 5)
        assert diff_vector(v, v) == (0,) * SUBCARRIER_COUNT

    def test_worked_example(self):
        primary = vec(10, 10, 2, 0)
        secondary = vec(2, 2, 8, 6)
        d = diff_vector(primary, secondary)
        assert d[:4] == (-8, -8, 6, 6)
        assert set(d[4:]) == {0}

    def test_antisymmetry(self):
        rng = SplitMix64(5, 0)
        a = tuple(rng.randbelow(11) for _ in range(SUBCARRIER_COUNT))
        b = tuple(rng.randbelow(11) for _ in range(SUBCARRIER_COUNT))
        assert diff_vector(a, b) == tuple(-x for x in diff_vector(b, a))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            diff_vector((0,) * 916, (0,) * SUBCARRIER_COUNT)


class TestEligibleIndices:
    def test_worked_example(self):
        d = vec(-8, -8, 6, 6)
        assert eligible_indices(d, 2) & {1, 2, 3, 4} == {3, 4}

    def test_beta_above_max_empty(self):
        assert eligible_indices(vec(-8, -8, 6, 6), 7) == frozenset()

    def test_zero_beta_on_zero_vector_is_inclusive(self):
        assert len(eligible_indices((0,) * SUBCARRIER_COUNT, 0)) == SUBCARRIER_COUNT

    def test_monotone_shrinking_in_beta(self):
        rng = SplitMix64(6, 0)
        d = tuple(rng.randbelow(21) - 10 for _ in range(SUBCARRIER_COUNT))
        previous = eligible_indices(d, 0)
        for beta in range(1, 11):
            current = eligible_indices(d, beta)
            assert current <= previous
            previous = current


class TestGain:
    def test_worked_example(self):
        primary = vec(10, 10, 2, 0)
        secondary = vec(2, 2, 8, 6)
        assert gain(primary, secondary, {3, 4}) == 12

    def test_empty_indices(self):
        assert gain(vec(1), vec(9), ()) == 0

    def test_equal_maps_zero(self):
        v = vec(4, 4, 4, 4)
        assert gain(v, v, range(1, 5)) == 0

    def test_index_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            gain(vec(), vec(), [0])

    def test_equals_diff_vector_sum(self):
        rng = SplitMix64(8, 0)
        p = tuple(rng.randbelow(11) for _ in range(SUBCARRIER_COUNT))
        s = tuple(rng.randbelow(11) for _ in range(SUBCARRIER_COUNT))
        d = diff_vector(p, s)
        indices = eligible_indices(d, 3)
        assert gain(p, s, indices) == sum(d[j - 1] for j in indices)


class TestDecisionTable:
    def test_two_node_deployment_all_empty(self):
        dep = deployment_from_levels({("n1", "n2"): 10, ("n2", "n1"): 2})
        table = build_decision_table(dep, SSPolicy(beta=2, top_m=3))
        assert all(not c for c in table.entries.values())

    def test_complementary_has_candidates(self):
        dep = generate_deployment(
            4, GeneratorProfile("complementary", base_quality=6, asymmetry_noise=2, seed=3)
        )
        table = build_decision_table(dep, SSPolicy(beta=2, top_m=2))
        assert any(c for c in table.entries.values())

    def test_matches_brute_force_enumeration(self):
        for seed in (1, 2, 3):
            dep = generate_deployment(
                4,
                GeneratorProfile(
                    "complementary", base_quality=6, asymmetry_noise=2, seed=seed
                ),
            )
            for policy in (SSPolicy(2, 2), SSPolicy(6, 1), SSPolicy(4, 3, 0.3)):
                table = build_decision_table(dep, policy)
                assert tables_equal(table, brute_force_table(dep, policy))

    def test_raising_beta_never_raises_gain_or_count(self):
        dep = generate_deployment(
            4, GeneratorProfile("complementary", base_quality=6, asymmetry_noise=3, seed=9)
        )
        prev = build_decision_table(dep, SSPolicy(beta=0, top_m=4))
        for beta in (2, 4, 6, 8, 10):
            current = build_decision_table(dep, SSPolicy(beta=beta, top_m=4))
            for key, prev_cands in prev.entries.items():
                cur_cands = current.entries[key]
                assert len(cur_cands) <= len(prev_cands)
                prev_by_link = {c.secondary: c.gain for c in prev_cands}
                for c in cur_cands:
                    assert c.gain <= prev_by_link.get(c.secondary, 0) or c.secondary not in prev_by_link
            prev = current

    def test_share_cap_truncates_keeping_best(self):
        # secondary beats primary by 4 on the first 10 subcarriers, by 9 after
        primary = vec(*([1] * 20))
        secondary = tuple(
            5 if j < 10 else (10 if j < 20 else 0) for j in range(SUBCARRIER_COUNT)
        )
        dep = deployment_from_levels(
            {("n1", "n2"): 0, ("n2", "n1"): 0, ("n3", "n4"): 0, ("n4", "n3"): 0}, 1
        )
        links = dict(dep.links)
        from hpavsim import Tonemap

        links[DirectedLink("n1", "n2")] = Tonemap([primary])
        links[DirectedLink("n3", "n4")] = Tonemap([secondary])
        from hpavsim import Deployment

        dep = Deployment(dep.nodes, links)
        cap_15 = 15 / SUBCARRIER_COUNT
        table = build_decision_table(dep, SSPolicy(beta=2, top_m=1, max_share_fraction=cap_15))
        (alloc,) = table.entries[(DirectedLink("n1", "n2"), 1)]
        # all ten 9-diff indices kept, then the five lowest-index 4-diff ones,
        # stored in ascending order
        assert alloc.shared_indices == tuple(range(1, 6)) + tuple(range(11, 21))
        assert alloc.gain == 10 * 9 + 5 * 4

    def test_allocations_validate_disjointness_and_positive_gain(self):
        with pytest.raises(ValueError, match="shares a node"):
            SSAllocation(
                DirectedLink("a", "b"), DirectedLink("b", "c"), 1, (1,), 5, 1
            )
        with pytest.raises(ValueError, match="positive gain"):
            SSAllocation(
                DirectedLink("a", "b"), DirectedLink("c", "d"), 1, (), 0, 1
            )

    def test_deterministic(self):
        dep = generate_deployment(
            4, GeneratorProfile("complementary", base_quality=6, asymmetry_noise=2, seed=4)
        )
        policy = SSPolicy(beta=2, top_m=2)
        assert build_decision_table(dep, policy) == build_decision_table(dep, policy)

    def test_csv_shape(self):
        dep = generate_deployment(
            4, GeneratorProfile("complementary", base_quality=6, asymmetry_noise=2, seed=4)
        )
        text = decision_table_csv(build_decision_table(dep, SSPolicy(beta=2, top_m=1)))
        lines = text.splitlines()
        assert lines[0] == (
            "primary_tx,primary_rx,slot,rank,secondary_tx,secondary_rx,gain,num_shared,indices"
        )
        first = lines[1].split(",")
        num_shared = int(first[7])
        assert len(first) == 8 + num_shared


class TestPolicy:
    def test_validation(self):
        with pytest.raises(ValueError):
            SSPolicy(beta=-1)
        with pytest.raises(ValueError):
            SSPolicy(top_m=0)
        with pytest.raises(ValueError):
            SSPolicy(max_share_fraction=1.5)
