import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from trialsearch.core import (
    AgentConfig,
    DimensionError,
    DomainError,
    EnumerationCursor,
    Instance,
    OracleSizeError,
    OutcomeKind,
    PartitionVector,
    ResourceMeter,
    flip_delta,
    oracle_par,
    run_agent,
    run_exhaustive,
    signed_sum,
    successor,
    trial,
    verify_witness,
)
from trialsearch.instances import worked_example

WORKED = worked_example()
WORKED_FINAL = PartitionVector((1, 1, 1, 0, 0, 1, 0, 0, 1))


def pv(s):
    return PartitionVector.from_string(s)


def brute_par(omega):
    """Third, itertools-based path: any sign vector summing to zero."""
    for signs in itertools.product((1, -1), repeat=len(omega)):
        if sum(s * w for s, w in zip(signs, omega)) == 0:
            return 1
    return 0


omegas = st.lists(st.integers(0, 2**70), min_size=1, max_size=12)


@st.composite
def omega_and_p(draw):
    omega = draw(omegas)
    bits = draw(st.lists(st.booleans(), min_size=len(omega), max_size=len(omega)))
    return Instance(tuple(omega)), PartitionVector(tuple(bits))


class TestInstance:
    def test_rejects_empty_and_negative(self):
        with pytest.raises(DomainError):
            Instance(())
        with pytest.raises(DomainError):
            Instance((1, -2))

    def test_duplicates_and_zero_allowed(self):
        assert Instance((0, 0, 5, 5)).n == 4

    def test_bad_label(self):
        with pytest.raises(DomainError):
            Instance((1,), label=2)


class TestSignedSum:
    def test_worked_final_partition(self):
        assert signed_sum(WORKED_FINAL, WORKED) == 0

    def test_symmetric_pair(self):
        assert signed_sum(pv("10"), Instance((1, 1))) == 0

    def test_all_ones_is_total(self):
        assert signed_sum(PartitionVector.ones(9), WORKED) == 2258 == sum(WORKED.omega)

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            signed_sum(pv("10"), WORKED)

    def test_arbitrary_precision(self):
        big = 2**200
        inst = Instance((big, big, 1))
        assert signed_sum(pv("110"), inst) == 2 * big - 1


class TestTrial:
    def test_worked_success(self):
        fb = trial(WORKED_FINAL, WORKED)
        assert (fb.success, fb.discrepancy) == (True, 0)

    def test_one_side(self):
        fb = trial(pv("11"), Instance((1, 2)))
        assert (fb.success, fb.discrepancy) == (False, 3)

    def test_small_zero(self):
        fb = trial(pv("110"), Instance((1, 2, 3)))
        assert (fb.success, fb.discrepancy) == (True, 0)

    def test_meter_counts_exactly_one(self):
        m = ResourceMeter()
        for _ in range(5):
            trial(pv("11"), Instance((1, 2)), m)
        assert m.trials == 5 and m.steps == 0

    @given(omega_and_p())
    def test_feedback_invariants(self, pair):
        inst, p = pair
        fb = trial(p, inst)
        assert fb.success == (fb.discrepancy == 0)
        assert abs(fb.discrepancy) <= inst.total


class TestFlipDelta:
    def test_worked_flip_932(self):
        assert flip_delta(PartitionVector.ones(9), WORKED, 2, 2258) == 394 == 2258 - 2 * 932

    def test_zero_element(self):
        inst = Instance((0, 3, 4))
        p = pv("011")
        t = signed_sum(p, inst)
        assert flip_delta(p, inst, 0, t) == t

    def test_pair(self):
        assert flip_delta(pv("10"), Instance((1, 1)), 0, 0) == -2

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            flip_delta(pv("10"), Instance((1, 1)), 2, 0)


class TestAlgebra:
    @given(omega_and_p())
    def test_antisymmetry(self, pair):
        inst, p = pair
        assert signed_sum(p.complement(), inst) == -signed_sum(p, inst)
        assert p.complement().complement() == p

    @given(omega_and_p(), st.randoms(use_true_random=False))
    def test_permutation_equivariance(self, pair, rnd):
        inst, p = pair
        perm = list(range(inst.n))
        rnd.shuffle(perm)
        inst2 = Instance(tuple(inst.omega[k] for k in perm))
        p2 = PartitionVector(tuple(p.bits[k] for k in perm))
        assert signed_sum(p2, inst2) == signed_sum(p, inst)

    @given(omega_and_p(), st.data())
    def test_flip_consistency(self, pair, data):
        inst, p = pair
        j = data.draw(st.integers(0, inst.n - 1))
        t = signed_sum(p, inst)
        assert signed_sum(p.flip(j), inst) == flip_delta(p, inst, j, t)


class TestSuccessor:
    def test_counter_increment(self):
        assert successor(pv("000"), pruned=False) == pv("100")
        assert successor(pv("110"), pruned=False) == pv("001")

    def test_wraps(self):
        assert successor(pv("111"), pruned=False) == pv("000")

    def test_pruned_holds_last_bit(self):
        assert successor(pv("110"), pruned=True) == pv("000")
        assert successor(pv("111"), pruned=True) == pv("001")


class TestRunExhaustive:
    def test_pair_unpruned(self):
        out = run_exhaustive(Instance((1, 1)), EnumerationCursor.zeros(2, pruned=False))
        assert out.kind is OutcomeKind.FOUND
        assert out.witness == pv("10")
        assert out.trials == 2

    def test_no_partition_pruned(self):
        out = run_exhaustive(Instance((1, 2)), EnumerationCursor.zeros(2, pruned=True))
        assert out.kind is OutcomeKind.CLAIMED_NONE
        assert out.trials == 2

    def test_worked_example(self):
        out = run_exhaustive(WORKED)
        assert out.kind is OutcomeKind.FOUND
        assert verify_witness(out.witness, WORKED)

    def test_visits_every_vector_once(self):
        # a no-instance forces the full traversal; record the order via a meter-free replay
        inst = Instance((1, 2, 4, 8))
        for pruned in (False, True):
            out = run_exhaustive(inst, EnumerationCursor(pv("1010"), pruned))
            assert out.trials == (8 if pruned else 16)

    def test_start_vector_and_wrap(self):
        # unpruned start (1,1): order (1,1), (0,0), (1,0) -> hits at third trial
        out = run_exhaustive(Instance((1, 1)), EnumerationCursor(pv("11"), pruned=False))
        assert out.kind is OutcomeKind.FOUND and out.trials == 3
        assert out.witness == pv("10")

    def test_incremental_matches_direct(self):
        rng = random.Random(5)
        for _ in range(200):
            n = rng.randint(1, 9)
            inst = Instance(tuple(rng.randint(0, 30) for _ in range(n)))
            start = PartitionVector.from_int(rng.getrandbits(n), n)
            pruned = rng.random() < 0.5
            out = run_exhaustive(inst, EnumerationCursor(start, pruned))
            # replay with successor() and direct signed sums
            p, k = start, 0
            size = 1 << (n - 1 if pruned else n)
            while k < size:
                k += 1
                if signed_sum(p, inst) == 0:
                    break
                p = successor(p, pruned)
            else:
                p = None
            assert out.trials == k
            assert out.witness == p

    def test_meter(self):
        m = ResourceMeter()
        out = run_exhaustive(Instance((1, 2)), meter=m)
        assert m.trials == out.trials == 2
        assert m.steps == out.steps


class TestRunAgent:
    def test_budget_zero(self):
        out = run_agent(WORKED, AgentConfig(strategy="greedy", budget=0))
        assert out.kind is OutcomeKind.BUDGET_EXHAUSTED and out.trials == 0

    def test_default_budget(self):
        cfg = AgentConfig(strategy="random", rng_seed=3)
        inst = Instance((2**40, 3, 2**41 + 1, 7, 9, 11))
        out = run_agent(inst, cfg)
        assert out.trials <= 64 * inst.n

    def test_strategy_crash_becomes_gave_up(self):
        class Boom:
            def __init__(self, state, inst):
                pass

            def decide(self, t, p, inst):
                raise RuntimeError("kaboom")

        out = run_agent(Instance((1, 3)), AgentConfig(strategy=Boom, budget=10))
        assert out.kind is OutcomeKind.GAVE_UP
        assert "kaboom" in out.diagnostic

    def test_uncertified_claim_is_downgraded(self):
        from trialsearch.strategies import StrategyDecision

        class Liar:
            def __init__(self, state, inst):
                pass

            def decide(self, t, p, inst):
                return StrategyDecision.claim(None)

        out = run_agent(Instance((1, 1)), AgentConfig(strategy=Liar, budget=10))
        assert out.kind is OutcomeKind.GAVE_UP
        out = run_agent(Instance((1, 1)), AgentConfig(strategy=Liar, budget=10, unsound_claims=True))
        assert out.kind is OutcomeKind.CLAIMED_NONE and out.certificate is None

    def test_meter_and_determinism(self):
        cfg = AgentConfig(strategy="random+restart", initial="random", rng_seed=11)
        inst = Instance(tuple(range(1, 30, 3)))
        m = ResourceMeter()
        a = run_agent(inst, cfg, m)
        b = run_agent(inst, cfg)
        assert a == b
        assert m.trials == a.trials and m.steps == a.steps


class TestOracle:
    def test_small_yes(self):
        bit, w = oracle_par(Instance((1, 2, 3)))
        assert bit == 1 and signed_sum(w, Instance((1, 2, 3))) == 0

    def test_small_no(self):
        assert oracle_par(Instance((1, 2))) == (0, None)

    def test_zero_singleton(self):
        assert oracle_par(Instance((0,))) == (1, pv("1"))

    def test_cap(self):
        with pytest.raises(OracleSizeError):
            oracle_par(Instance(tuple(range(1, 27))))

    def test_big_values_use_exact_path(self):
        big = 2**70
        assert oracle_par(Instance((big, big + 1, 1)))[0] == 1
        assert oracle_par(Instance((big, big + 3, 1)))[0] == 0

    def test_agrees_with_itertools(self):
        rng = random.Random(1)
        for _ in range(300):
            omega = tuple(rng.randint(0, 20) for _ in range(rng.randint(1, 9)))
            bit, w = oracle_par(Instance(omega))
            assert bit == brute_par(omega)
            if bit:
                assert signed_sum(w, Instance(omega)) == 0

    @settings(max_examples=60)
    @given(st.lists(st.integers(0, 50), min_size=1, max_size=12))
    def test_oracle_equivalence_with_exhaustive(self, omega):
        inst = Instance(tuple(omega))
        for pruned in (True, False):
            out = run_exhaustive(inst, EnumerationCursor.zeros(inst.n, pruned))
            assert out.par == oracle_par(inst)[0]
