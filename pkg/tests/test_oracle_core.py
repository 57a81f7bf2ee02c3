import numpy as np
import pytest

from orc.bodies import Ball, ExactMembership, FlipNoise
from orc.core import (MEM, SEP, MembershipAnswer, ProblemGeometry,
                      QueryLedger, RandomStream, SeparationAnswer, amplify,
                      check_precision, wrap_with_ledger)
from orc.geometry import HalfSpace


def test_check_precision_bounds():
    check_precision(1e-6)
    check_precision(0.49)
    for bad in (0.0, 0.5, -0.1, 1.0):
        with pytest.raises(ValueError):
            check_precision(bad)


def test_problem_geometry_kappa_and_rescale():
    g = ProblemGeometry(3, 0.5, 2.0)
    assert g.kappa == 4.0
    np.testing.assert_array_equal(g.center, np.zeros(3))
    scaled = g.rescaled()
    assert scaled.r == 0.25 and scaled.R == 1.0
    assert scaled.kappa == 4.0


def test_problem_geometry_rejects_bad_radii():
    with pytest.raises(ValueError):
        ProblemGeometry(2, 0.0, 1.0)
    with pytest.raises(ValueError):
        ProblemGeometry(2, 2.0, 1.0)


def test_membership_answer_inside_flag():
    assert MembershipAnswer.INSIDE_DILATED.inside
    assert not MembershipAnswer.OUTSIDE_ERODED.inside


def test_separation_answer_variants():
    assert SeparationAnswer().halfspace is None
    h = HalfSpace(np.array([1.0, 0.0]), np.zeros(2), 0.0)
    assert SeparationAnswer(h).halfspace is h


def test_ledger_counts_by_kind_and_delta():
    ledger = QueryLedger()
    ledger.record(MEM, 0.01)
    ledger.record(MEM, 0.01)
    ledger.record(MEM, 0.02)
    ledger.record(SEP, 0.01, count=5)
    assert ledger.count(MEM, 0.01) == 2
    assert ledger.count(MEM) == 3
    assert ledger.totals() == {MEM: 3, SEP: 5}


def test_ledger_merge_folds_counts():
    a, b = QueryLedger(), QueryLedger()
    a.record(MEM, 0.01, 2)
    b.record(MEM, 0.01, 3)
    b.record(SEP, 0.1, 1)
    a.merge(b)
    assert a.count(MEM, 0.01) == 5
    assert a.count(SEP) == 1


def test_wrap_with_ledger_counts_every_call():
    ledger = QueryLedger()
    mem = wrap_with_ledger(ExactMembership(Ball(np.zeros(2), 1.0)), ledger)
    for _ in range(7):
        mem(np.zeros(2), 0.01)
    assert ledger.count(MEM, 0.01) == 7


def test_random_stream_same_path_same_draws():
    a = RandomStream(42).child(1, 2).generator().normal(size=5)
    b = RandomStream(42).child(1, 2).generator().normal(size=5)
    np.testing.assert_array_equal(a, b)


def test_random_stream_distinct_paths_differ():
    a = RandomStream(42).child(1).generator().normal(size=5)
    b = RandomStream(42).child(2).generator().normal(size=5)
    assert not np.array_equal(a, b)


def test_random_stream_string_labels_deterministic():
    a = RandomStream(7).child("query").generator().normal(size=3)
    b = RandomStream(7).child("query").generator().normal(size=3)
    c = RandomStream(7).child("other").generator().normal(size=3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_amplify_majority_beats_flip_noise():
    ball = Ball(np.zeros(2), 1.0)
    noisy = FlipNoise(ExactMembership(ball), 0.2, RandomStream(3).child(0))
    boosted = amplify(noisy, repetitions=15)
    errors = 0
    gen = RandomStream(4).generator()
    for _ in range(200):
        y = gen.normal(size=2)
        truth = MembershipAnswer.INSIDE_DILATED if np.linalg.norm(y) <= 1.0 \
            else MembershipAnswer.OUTSIDE_ERODED
        if boosted(y, 0.01) is not truth:
            errors += 1
    # single-query error rate is 20%; 15-fold majority drives it below 2%
    assert errors <= 4


def test_amplify_requires_odd_repetitions_for_majority():
    ball = Ball(np.zeros(2), 1.0)
    mem = ExactMembership(ball)
    with pytest.raises(ValueError):
        amplify(mem, repetitions=4)
