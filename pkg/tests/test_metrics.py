import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import teachgym.metrics as mt
from teachgym.tasks import MembershipResult, Trajectory


def record(item, ok):
    traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.0, 0.0], [0.1, 0.1]]))
    membership = (MembershipResult(True, frozenset(), 0.0) if ok
                  else MembershipResult(False, frozenset({"EndCondition"}), 0.01))
    return mt.RealizationRecord(item, traj, membership)


def records_from_bools(flags):
    return [record(i, ok) for i, ok in enumerate(flags)]


def line(p, q, n=12):
    p, q = np.asarray(p, float), np.asarray(q, float)
    u = np.linspace(0.0, 1.0, n)
    return Trajectory(u, p[None, :] + u[:, None] * (q - p)[None, :])


CFG = mt.MetricsConfig()
MEMBER = MembershipResult(True, frozenset(), 0.0)
NON_MEMBER = MembershipResult(False, frozenset({"AdmissibleSpace"}), 0.02)


class TestEfficacy:
    def test_full_coverage(self):
        rep = mt.efficacy(records_from_bools([True] * 140), 140)
        assert rep.efficacy == 1.0

    def test_zero(self):
        assert mt.efficacy(records_from_bools([False] * 10), 10).efficacy == 0.0

    def test_half(self):
        flags = [True] * 70 + [False] * 70
        assert mt.efficacy(records_from_bools(flags), 140).efficacy == 0.5

    def test_duplicate_item_rejected(self):
        recs = records_from_bools([True, True])
        recs.append(record(1, False))
        with pytest.raises(ValueError):
            mt.efficacy(recs, 3)

    def test_missing_item_rejected(self):
        with pytest.raises(ValueError):
            mt.efficacy(records_from_bools([True, True]), 3)


class TestEfficiency:
    def test_upper_bound(self):
        assert mt.efficiency(1.0, 1) == 1.0

    def test_arithmetic(self):
        assert mt.efficiency(0.9, 6) == pytest.approx(0.15)

    def test_zero_demos_rejected(self):
        with pytest.raises(ValueError):
            mt.efficiency(0.5, 0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 1.0), st.integers(1, 30))
    def test_monotone_in_demo_count(self, nu, m):
        assert mt.efficiency(nu, m + 1) <= mt.efficiency(nu, m)


class TestSimilarity:
    def test_identical_demo_is_zero(self):
        demo = line((0, 0), (0.1, 0.2))
        assert mt.similarity(demo, [demo], CFG) == 0.0

    def test_uniform_translation(self):
        demo = line((0, 0), (0.1, 0.2))
        moved = line((0.04, 0), (0.14, 0.2))
        assert mt.similarity(moved, [demo], CFG) == pytest.approx(0.04)

    def test_min_over_existing_matches_bruteforce(self):
        existing = [line((0, 0), (0.1, 0.2)), line((0.02, 0.01), (0.1, 0.18)),
                    line((0.08, 0.0), (0.18, 0.22))]
        candidate = line((0.021, 0.012), (0.1, 0.181))

        def mean_dist(a, b):
            ra = a.resampled(CFG.similarity_resample_len).pos
            rb = b.resampled(CFG.similarity_resample_len).pos
            return float(np.linalg.norm(ra - rb, axis=1).mean())

        want = min(mean_dist(candidate, d) for d in existing)
        got = mt.similarity(candidate, existing, CFG)
        assert got == pytest.approx(want)
        assert got == pytest.approx(mean_dist(candidate, existing[1]))

    def test_needs_existing(self):
        with pytest.raises(ValueError):
            mt.similarity(line((0, 0), (1, 1)), [], CFG)

    def test_symmetric_under_swap_with_nearest(self):
        a = line((0, 0), (0.1, 0.2))
        b = line((0.01, 0.02), (0.12, 0.19))
        assert mt.similarity(a, [b], CFG) == pytest.approx(mt.similarity(b, [a], CFG))


class TestClassifyDemo:
    def test_membership_failure_dominates(self):
        c = mt.classify_demo(0.9, 0.1, 99.0, NON_MEMBER, CFG)
        assert c.label == mt.INCORRECT

    def test_duplicate_is_ambiguous(self):
        c = mt.classify_demo(0.5, 0.5, 0.0, MEMBER, CFG)
        assert c.label == mt.AMBIGUOUS

    def test_large_gain_is_informative(self):
        c = mt.classify_demo(0.8, 0.5, 0.5, MEMBER, CFG)
        assert c.label == mt.INFORMATIVE

    def test_degradation_is_incorrect(self):
        c = mt.classify_demo(0.3, 0.5, 0.5, MEMBER, CFG)
        assert c.label == mt.INCORRECT

    def test_missing_actions_is_membership_invalid(self):
        res = MembershipResult(False, frozenset({"GrabDistance", "ReleaseDistance"}),
                               0.1, missing_actions=True)
        assert mt.classify_demo(0.5, 0.5, 9.0, res, CFG).label == mt.MEMBERSHIP_INVALID

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.booleans())
    def test_total_and_deterministic(self, nu_m, nu_prev, s, member):
        membership = MEMBER if member else NON_MEMBER
        a = mt.classify_demo(nu_m, nu_prev, s, membership, CFG)
        b = mt.classify_demo(nu_m, nu_prev, s, membership, CFG)
        assert a == b
        assert a.label in (mt.INFORMATIVE, mt.AMBIGUOUS, mt.INCORRECT)


class TestStateSets:
    def test_all_successful(self):
        rep = mt.efficacy(records_from_bools([True] * 140), 140)
        assert mt.undemonstrated_states(rep, {3, 5}) == frozenset()

    def test_set_arithmetic_case(self):
        flags = [i < 60 for i in range(100)]
        rep = mt.efficacy(records_from_bools(flags), 100)
        demo_covered = {60, 61, 62, 63, 64}
        assert len(mt.undemonstrated_states(rep, demo_covered)) == 35

    def test_generalisation_trivial_cases(self):
        rep = mt.efficacy(records_from_bools([i == 7 for i in range(20)]), 20)
        assert mt.generalisation_set(rep, {7}) == frozenset()
        flags = [i in (6, 7, 8) for i in range(20)]
        rep = mt.efficacy(records_from_bools(flags), 20)
        assert mt.generalisation_set(rep, {7}) == {6, 8}

    def test_full_grid_with_five_demos(self):
        rep = mt.efficacy(records_from_bools([True] * 140), 140)
        assert len(mt.generalisation_set(rep, set(range(5)))) == 135

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 2 ** 31 - 1))
    def test_against_bruteforce_oracle(self, n, seed):
        rng = np.random.default_rng(seed)
        flags = rng.uniform(size=n) < 0.5
        covered = {int(i) for i in rng.integers(0, n, size=rng.integers(0, n + 1))}
        rep = mt.efficacy(records_from_bools(flags), n)

        undemo_oracle = {i for i in range(n) if not flags[i] and i not in covered}
        gen_oracle = {i for i in range(n) if flags[i] and i not in covered}
        undemo = mt.undemonstrated_states(rep, covered)
        gen = mt.generalisation_set(rep, covered)
        assert undemo == undemo_oracle
        assert gen == gen_oracle
        assert undemo.isdisjoint(gen)
        assert (undemo | gen | covered) >= rep.successful_items()


def step_report(nus):
    classes = [mt.DemoClassification(mt.INFORMATIVE, 0.0, 1.0) for _ in nus]
    final = mt.efficacy(records_from_bools([True] * 10), 10)
    return mt.build_report(list(nus), classes, final, set(), CFG)


class TestSessionReport:
    def test_ninety_percent_rule_reached(self):
        rep = step_report([0.2, 0.5, 0.7, 0.8, 0.93, 0.95, 0.96, 0.97])
        assert rep.eta_demo_count == 5
        assert rep.final_eta == pytest.approx(0.93 / 5)

    def test_ninety_percent_rule_not_reached(self):
        rep = step_report([0.2, 0.4, 0.5, 0.6, 0.7, 0.8])
        assert rep.eta_demo_count == 6
        assert rep.final_eta == pytest.approx(0.8 / 6)

    def test_single_perfect_demo(self):
        rep = step_report([1.0])
        assert rep.final_eta == 1.0
        assert rep.plain_eta == 1.0

    def test_totals_and_serialization(self):
        classes = [mt.DemoClassification(lbl, 0.0, 0.0)
                   for lbl in (mt.INFORMATIVE, mt.AMBIGUOUS, mt.INCORRECT, mt.AMBIGUOUS)]
        final = mt.efficacy(records_from_bools([True] * 5 + [False] * 5), 10)
        rep = mt.build_report([0.1, 0.1, 0.05, 0.5], classes, final, {0, 5}, CFG)
        assert rep.ambiguous_count == 2
        assert rep.incorrect_count == 1
        assert rep.undemonstrated_count == 4     # items 6..9 (5 covered by a demo)
        d = rep.to_dict()
        assert d["totals"]["ambiguous"] == 2
        text = rep.to_text()
        assert "Undemonstrated States" in text and "Ambiguous Demonstrations" in text

    def test_empty_session_rejected(self):
        with pytest.raises(ValueError):
            step_report([])
