import math

import numpy as np
import pytest

from orc.bodies import (Ball, BoxBody, ExactMembership, ExactSeparation,
                        ExactViolation, HPolytope, brute_force_lp)
from orc.core import (MembershipAnswer, ProblemGeometry, QueryLedger,
                      RandomStream, SeparationAnswer, VIOL, ViolationAnswer,
                      wrap_with_ledger)
from orc.ellipsoid import (EllipsoidState, MaxItersExhausted,
                           OptimizerConfig, OracleInconsistency,
                           ellipsoid_cut, opt_from_viol, optimize_linear,
                           viol_from_opt)
from orc.geometry import HalfSpace, unit


# ---------------------------------------------------------------------------
# the cut update itself

def test_cut_example_center_and_volume_ratio():
    state = EllipsoidState.ball(np.zeros(2), 1.0)
    new = ellipsoid_cut(state, np.array([1.0, 0.0]))
    np.testing.assert_allclose(new.center, [-1.0 / 3.0, 0.0], atol=1e-12)
    ratio = new.log_volume() - state.log_volume()
    assert abs(ratio - (-1.0 / 6.0)) < 1e-9


def test_cut_log_volume_decrement_is_constant():
    gen = np.random.default_rng(0)
    for n in (1, 2, 3, 7):
        state = EllipsoidState.ball(gen.normal(size=n), 2.0)
        for _ in range(25):
            normal = unit(gen.normal(size=n))
            new = ellipsoid_cut(state, normal)
            drop = state.log_volume() - new.log_volume()
            assert abs(drop - 1.0 / (2.0 * (n + 1))) < 1e-12
            state = new


def test_k_cuts_volume_product():
    n, k = 3, 40
    state = EllipsoidState.ball(np.zeros(n), 1.0)
    start = state.log_volume()
    gen = np.random.default_rng(1)
    for _ in range(k):
        state = ellipsoid_cut(state, unit(gen.normal(size=n)))
    assert abs((start - state.log_volume()) - k / (2.0 * (n + 1))) < 1e-9


def test_cut_keeps_the_retained_halfspace_center_side():
    # new ellipsoid center moves into {y : <normal, y - c> <= 0}
    gen = np.random.default_rng(2)
    state = EllipsoidState.ball(np.zeros(4), 1.0)
    for _ in range(20):
        normal = unit(gen.normal(size=4))
        new = ellipsoid_cut(state, normal)
        assert float(normal @ (new.center - state.center)) < 0.0
        state = new


# ---------------------------------------------------------------------------
# optimize_linear

def _opt(spec, c, eps=1e-3, geometry=None):
    geometry = geometry or spec.geometry
    cfg = OptimizerConfig(eps=eps)
    return optimize_linear(cfg, ExactSeparation(spec), geometry, c)


def test_ball_maximizes_last_coordinate():
    n = 4
    ans = _opt(Ball(np.zeros(n), 1.0), np.eye(n)[-1])
    assert ans.maximizer is not None
    assert ans.maximizer[-1] >= 1.0 - 2e-3


def test_box_corner_objective():
    n, eps = 3, 1e-3
    spec = BoxBody(np.zeros(n), 1.0)
    ans = _opt(spec, np.ones(n), eps=eps)
    val = float(np.ones(n) @ ans.maximizer)
    assert val >= 3.0 - 3.0 * eps * spec.geometry.kappa * math.sqrt(n)


def test_polytope_matches_brute_force():
    A = np.array([[1.0, 1.0], [-2.0, 1.0], [1.0, -2.0]])
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    b = np.array([1.0 / math.sqrt(2.0), 1.0 / math.sqrt(5.0),
                  1.0 / math.sqrt(5.0)])
    tri = HPolytope(A, b, interior_point=np.zeros(2))
    gen = np.random.default_rng(3)
    for _ in range(10):
        c = unit(gen.normal(size=2))
        val, _ = brute_force_lp(tri, c)
        ans = _opt(tri, c, eps=1e-4)
        assert float(c @ ans.maximizer) >= val - 0.01


def test_empty_interior_certificate():
    # oracle that cuts with the same halfspace family forever: the body
    # is (reported as) empty, so the volume floor must be reached
    gen = np.random.default_rng(4)

    def sep(y, delta):
        return SeparationAnswer(HalfSpace(unit(gen.normal(size=3)), y, 0.0))

    sep.kind = "SEP"
    cfg = OptimizerConfig(eps=0.01)
    ans = optimize_linear(cfg, sep, ProblemGeometry(3, 0.5, 1.0),
                          np.array([1.0, 0.0, 0.0]))
    assert ans.empty_interior


def test_max_iters_exhausted():
    spec = Ball(np.zeros(2), 1.0)
    cfg = OptimizerConfig(eps=1e-6, max_iters=1)

    def never_inside(y, delta):
        return SeparationAnswer(HalfSpace(np.array([1.0, 0.0]), y, 0.0))

    never_inside.kind = "SEP"
    with pytest.raises(MaxItersExhausted):
        optimize_linear(cfg, never_inside, spec.geometry, np.array([0.0, 1.0]))


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(eps=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(eps=1.5)
    with pytest.raises(ValueError):
        OptimizerConfig(eps=0.1, max_iters=0)


def test_sep_delta_schedule_floor():
    cfg = OptimizerConfig(eps=1e-6, sep_delta_exponent=3)
    geom = ProblemGeometry(5, 1.0, 10.0)
    assert cfg.resolved_sep_delta(geom) == 1e-12
    cfg2 = OptimizerConfig(eps=0.1, sep_delta=0.05)
    assert cfg2.resolved_sep_delta(geom) == 0.05


# ---------------------------------------------------------------------------
# opt_from_viol / viol_from_opt

def test_opt_from_viol_query_count_and_value():
    spec = Ball(np.zeros(2), 1.0)
    ledger = QueryLedger()
    viol = wrap_with_ledger(ExactViolation(spec), ledger)
    delta = 1e-3
    opt = opt_from_viol(viol, delta)
    c = np.array([1.0, 0.0])
    ans = opt(c, delta)
    assert ledger.count(VIOL) == math.ceil(math.log2(2.0 / delta))
    assert abs(float(c @ ans.maximizer) - 1.0) <= 2.0 * delta


def test_opt_viol_round_trip_tolerance():
    spec = BoxBody(np.zeros(3), 1.0)
    delta = 1e-4
    viol = viol_from_opt(opt_from_viol(ExactViolation(spec), delta))
    c = unit(np.ones(3))
    sup = math.sqrt(3.0)
    assert viol(c, sup - 3.0 * delta, delta).witness is not None
    assert viol(c, sup + 3.0 * delta, delta).witness is None


def test_oracle_inconsistency_detected():
    # malicious violation oracle: claims a witness but hands back a
    # point far below the threshold
    def bad_viol(c, gamma, delta):
        return ViolationAnswer(np.array([-1.0, 0.0]))

    bad_viol.kind = VIOL
    opt = opt_from_viol(bad_viol, 1e-3)
    with pytest.raises(OracleInconsistency):
        opt(np.array([1.0, 0.0]), 1e-3)
