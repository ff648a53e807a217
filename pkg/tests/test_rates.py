"""Rate formulas: DPC, the covariance construction, ZF, region bounds."""

import math

import numpy as np
import pytest

from mimodof.channel import MimoBcChannel, transform_channel
from mimodof.errors import ValidationError
from mimodof.matdecomp import gsvd
from mimodof.rates import (
    AllocationProfile,
    DofParams,
    RateTriple,
    build_dpc_covariances,
    clog2,
    dpc_rates,
    dpc_rates_diagonal,
    equal_power_allocation,
    estimate_dof,
    feasible_params,
    parallel_region_bounds,
    sylvester_check,
    zf_rates,
    zf_subchannel_assignment,
)


def channel_pipeline(h1, h2, power=1.0):
    ch = MimoBcChannel(h1=h1, h2=h2, power=power)
    factors = gsvd(ch.h1, ch.h2)
    pch = transform_channel(ch, factors)
    return ch, factors, pch


def unit_gain_channel(n1, nc, n2, power):
    """Hand-built parallel channel with unit gains and no power relaxation."""
    from mimodof.channel import ParallelChannel, SubchannelPartition

    s1 = tuple(range(1, n1 + 1))
    sc = tuple(range(n1 + 1, n1 + nc + 1))
    s2 = tuple(range(n1 + nc + 1, n1 + nc + n2 + 1))
    part = SubchannelPartition(s1=s1, sc=sc, s2=s2, sc1=sc, sc2=())
    return ParallelChannel(
        gains1={l: 1.0 for l in s1 + sc},
        gains2={l: 1.0 for l in sc + s2},
        partition=part,
        zeta=1.0,
        relaxed_power=power,
    )


# ---------------------------------------------------------------------------
# dpc_rates


def test_dpc_all_zero_covariances():
    z = np.zeros((1, 1))
    rt = dpc_rates(z, z, z, [[1.0]], [[1.0]])
    assert rt.as_tuple() == (0.0, 0.0, 0.0)


def test_dpc_scalar_common_only():
    p = 7.0
    rt = dpc_rates([[p]], [[0.0]], [[0.0]], [[1.0]], [[1.0]])
    assert rt.r0 == pytest.approx(clog2(p))
    assert rt.r1 == 0.0 and rt.r2 == 0.0


def test_dpc_scalar_user2_only():
    p = 3.0
    rt = dpc_rates([[0.0]], [[0.0]], [[p]], [[1.0]], [[1.0]])
    assert rt.r2 == pytest.approx(clog2(p))
    assert rt.r0 == 0.0 and rt.r1 == 0.0


def test_dpc_rejects_non_psd():
    bad = [[-1.0, 0.0], [0.0, 1.0]]
    eye = np.eye(2)
    with pytest.raises(ValidationError):
        dpc_rates(bad, eye, eye, eye, eye)
    with pytest.raises(ValidationError):
        dpc_rates([[0.0, 1.0], [0.0, 0.0]], eye, eye, eye, eye)


# ---------------------------------------------------------------------------
# covariance construction


def test_lambda_pattern_all_common():
    ch, factors, pch = channel_pipeline(np.eye(2), np.eye(2), power=4.0)
    prof = build_dpc_covariances(DofParams(0, 0, 0), factors, pch.partition, ch.power)
    assert np.array_equal(prof.lambda0, [1.0, 1.0])
    assert np.array_equal(prof.lambda1, [0.0, 0.0])
    assert np.array_equal(prof.lambda2, [0.0, 0.0])


def test_lambda_pattern_private_pair_lent_to_common():
    h1 = np.array([[1.0, 0.0]])
    h2 = np.array([[0.0, 1.0]])
    ch, factors, pch = channel_pipeline(h1, h2, power=4.0)
    assert pch.partition.sizes == (1, 0, 1)
    prof = build_dpc_covariances(DofParams(0, 0, 1), factors, pch.partition, ch.power)
    assert np.array_equal(prof.lambda0, [1.0, 1.0])  # positions 1 and k
    assert np.array_equal(prof.lambda1, [0.0, 0.0])
    assert np.array_equal(prof.lambda2, [0.0, 0.0])


def test_trace_normalization_and_identity():
    rng = np.random.default_rng(123)
    h1 = rng.standard_normal((3, 4))
    h2 = rng.standard_normal((2, 4))
    ch, factors, pch = channel_pipeline(h1, h2, power=9.0)
    for params in feasible_params(pch.partition.sizes):
        prof = build_dpc_covariances(params, factors, pch.partition, ch.power)
        total = np.trace(prof.k0 + prof.k1 + prof.k2)
        assert total == pytest.approx(ch.power, rel=1e-10)
        assert set(np.unique(prof.lambda0)) <= {0.0, 1.0}
        # received-covariance identity: (1/(xi P)) Hj Ku Hj^T == psi_j sigma_j
        # diag(lambda_u) sigma_j^T psi_j^T
        scale = prof.xi * ch.power
        for h, psi, sigma in (
            (h1, factors.psi1, factors.sigma1),
            (h2, factors.psi2, factors.sigma2),
        ):
            for lam, ku in (
                (prof.lambda0, prof.k0),
                (prof.lambda1, prof.k1),
                (prof.lambda2, prof.k2),
            ):
                lhs = h @ ku @ h.T
                rhs = scale * psi @ sigma @ np.diag(lam) @ sigma.T @ psi.T
                assert np.allclose(lhs, rhs, atol=1e-8 * (1.0 + abs(scale)))


def test_degenerate_empty_generators():
    ch, factors, pch = channel_pipeline(np.zeros((2, 2)), np.zeros((2, 2)), power=1.0)
    assert pch.partition.k == 0
    prof = build_dpc_covariances(DofParams(0, 0, 0), factors, pch.partition, ch.power)
    assert prof.xi == 0.0
    assert np.allclose(prof.k0, 0) and np.allclose(prof.k1, 0) and np.allclose(prof.k2, 0)


def test_covariance_params_bounds():
    ch, factors, pch = channel_pipeline(np.eye(2), np.eye(2))
    with pytest.raises(ValidationError):
        build_dpc_covariances(DofParams(2, 1, 0), factors, pch.partition, ch.power)
    with pytest.raises(ValidationError):
        build_dpc_covariances(DofParams(0, 0, 1), factors, pch.partition, ch.power)


# ---------------------------------------------------------------------------
# rate-form agreement and slopes


def test_diagonal_and_matrix_rates_agree():
    rng = np.random.default_rng(77)
    h1 = rng.standard_normal((3, 4))
    h2 = rng.standard_normal((3, 4))
    ch, factors, pch = channel_pipeline(h1, h2, power=1.0)
    for power in (1.0, 1e6, 1e12):
        for params in feasible_params(pch.partition.sizes):
            prof = build_dpc_covariances(params, factors, pch.partition, power)
            direct = dpc_rates(prof.k0, prof.k1, prof.k2, h1, h2)
            diag = dpc_rates_diagonal(prof, factors, power)
            for a, b in zip(direct.as_tuple(), diag.as_tuple()):
                assert abs(a - b) <= 1e-8


def test_dpc_rates_monotone_in_power():
    rng = np.random.default_rng(31)
    h1 = rng.standard_normal((2, 3))
    h2 = rng.standard_normal((2, 3))
    ch, factors, pch = channel_pipeline(h1, h2)
    params = next(iter(feasible_params(pch.partition.sizes)))
    prev = None
    for power in (1.0, 10.0, 1e3, 1e6, 1e9):
        prof = build_dpc_covariances(params, factors, pch.partition, power)
        rt = dpc_rates(prof.k0, prof.k1, prof.k2, h1, h2)
        if prev is not None:
            assert all(b >= a - 1e-9 for a, b in zip(prev.as_tuple(), rt.as_tuple()))
        prev = rt


def test_dpc_slopes_identity_channel():
    ch, factors, pch = channel_pipeline(np.eye(2), np.eye(2))
    params = DofParams(0, 0, 0)
    curve = []
    for power in (1e6, 1e9, 1e12):
        prof = build_dpc_covariances(params, factors, pch.partition, power)
        curve.append((power, dpc_rates(prof.k0, prof.k1, prof.k2, ch.h1, ch.h2)))
    est = estimate_dof(curve).as_floats()
    assert est == pytest.approx((2.0, 0.0, 0.0), abs=0.05)


# ---------------------------------------------------------------------------
# sylvester_check


def test_sylvester_zero():
    assert sylvester_check(np.zeros((2, 2)), np.zeros((2, 2))) == 0.0


def test_sylvester_rank_one_by_hand():
    # det(ab + I_1) = 1 + a.b = 12; det(ba + I_2) = 1 + tr(ba) = 12
    a = np.array([[1.0, 2.0]])
    b = np.array([[3.0], [4.0]])
    assert np.linalg.det(a @ b + np.eye(1)) == pytest.approx(12.0)
    assert np.linalg.det(b @ a + np.eye(2)) == pytest.approx(12.0)
    assert sylvester_check(a, b) <= 1e-12


def test_sylvester_random_rectangular():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((3, 2))
    b = rng.standard_normal((2, 3))
    assert sylvester_check(a, b) <= 1e-9


# ---------------------------------------------------------------------------
# zero-forcing


def test_zf_single_common_pipe():
    pch = unit_gain_channel(0, 1, 0, power=7.0)
    rt = zf_rates(DofParams(0, 0, 0), pch, {1: 7.0})
    assert rt.r0 == pytest.approx(clog2(7.0))
    assert rt.r1 == 0.0 and rt.r2 == 0.0


def test_zf_common_rides_private_pair():
    pch = unit_gain_channel(1, 0, 1, power=8.0)
    rt = zf_rates(DofParams(0, 0, 1), pch, {1: 4.0, 2: 4.0})
    assert rt.r0 == pytest.approx(clog2(4.0))  # min of two equal sums
    assert rt.r1 == 0.0 and rt.r2 == 0.0
    # the constructed pipeline agrees on the crossed single-antenna pair,
    # whose factorization happens to be gain-1 as well
    h1 = np.array([[1.0, 0.0]])
    h2 = np.array([[0.0, 1.0]])
    _, _, pch2 = channel_pipeline(h1, h2, power=4.0)
    rt2 = zf_rates(DofParams(0, 0, 1), pch2, {1: 4.0, 2: 4.0})
    assert rt2.r0 == pytest.approx(clog2(4.0))


def test_zf_zero_power():
    pch = unit_gain_channel(0, 2, 0, power=1.0)
    rt = zf_rates(DofParams(0, 0, 0), pch, {1: 0.0, 2: 0.0})
    assert rt.as_tuple() == (0.0, 0.0, 0.0)


def test_zf_assignment_covers_messages():
    rng = np.random.default_rng(8)
    h1 = rng.standard_normal((4, 5))
    h2 = rng.standard_normal((3, 5))
    ch, factors, pch = channel_pipeline(h1, h2)
    part = pch.partition
    n1, nc, n2 = part.sizes
    for params in feasible_params(part.sizes):
        assign = zf_subchannel_assignment(params, part)
        assert len(assign["common1"]) == nc - params.alpha1 - params.alpha2 + params.beta
        assert len(assign["common2"]) == nc - params.alpha1 - params.alpha2 + params.beta
        assert len(assign["private1"]) == n1 + params.alpha1 - params.beta
        assert len(assign["private2"]) == n2 + params.alpha2 - params.beta
        # user 1 only ever decodes subchannels it can see, same for user 2
        assert set(assign["common1"]) | set(assign["private1"]) <= set(part.s1 + part.sc)
        assert set(assign["common2"]) | set(assign["private2"]) <= set(part.sc + part.s2)
        # no subchannel carries two messages
        used = assign["common1"] + assign["private1"] + assign["private2"]
        extra = set(assign["common2"]) - set(assign["common1"])
        assert len(used) == len(set(used)) and not extra & set(used)


def test_equal_power_allocation_sums_to_budget():
    ch, factors, pch = channel_pipeline(np.eye(3), np.eye(3), power=6.0)
    alloc = equal_power_allocation(pch)
    assert sum(alloc.values()) == pytest.approx(pch.relaxed_power)


# ---------------------------------------------------------------------------
# parallel-channel bounds


def test_bounds_zero_power():
    pch = unit_gain_channel(0, 2, 0, power=1.0)
    alloc = AllocationProfile(
        gamma={1: 0.0, 2: 0.0},
        subpower={1: pch.relaxed_power, 2: 0.0},
    )
    bounds = parallel_region_bounds(pch, alloc)
    assert bounds[0] == 0.0 and bounds[1] == 0.0  # no common power anywhere


def test_bounds_single_common_subchannel():
    pch = unit_gain_channel(0, 1, 0, power=5.0)
    q = pch.relaxed_power
    alloc = AllocationProfile(gamma={1: 1.0}, subpower={1: q})
    b1, b2, b3, b4, b5, b6 = parallel_region_bounds(pch, alloc)
    assert b1 == pytest.approx(clog2(q))
    assert b2 == pytest.approx(clog2(q))
    assert b5 == pytest.approx(clog2(q))
    assert b6 == pytest.approx(clog2(q))


def test_bounds_budget_mismatch_rejected():
    pch = unit_gain_channel(0, 2, 0, power=1.0)
    alloc = AllocationProfile(gamma={1: 0.5, 2: 0.5}, subpower={1: 0.1, 2: 0.1})
    with pytest.raises(ValidationError):
        parallel_region_bounds(pch, alloc)


def test_bounds_dominated_by_full_power_envelope():
    rng = np.random.default_rng(15)
    h1 = rng.standard_normal((3, 3))
    h2 = rng.standard_normal((2, 3))
    ch, factors, pch = channel_pipeline(h1, h2, power=20.0)
    part = pch.partition
    labels = part.s1 + part.sc + part.s2
    for _ in range(20):
        raw = rng.random(len(labels))
        powers = dict(zip(labels, pch.relaxed_power * raw / raw.sum()))
        gammas = dict(zip(labels, rng.random(len(labels))))
        alloc = AllocationProfile(gamma=gammas, subpower=powers)
        b = parallel_region_bounds(pch, alloc)
        envelope = sum(clog2(pch.gains1[l] ** 2 * powers[l]) for l in part.s1 + part.sc1)
        envelope += sum(clog2(pch.gains2[l] ** 2 * powers[l]) for l in part.sc2 + part.s2)
        assert b[4] <= envelope + 1e-9
        assert b[5] <= envelope + 1e-9


# ---------------------------------------------------------------------------
# slope estimation


def test_estimate_dof_single_awgn():
    curve = [(p, RateTriple(clog2(p), 0.0, 0.0)) for p in (1e10, 1e12)]
    est = estimate_dof(curve).as_floats()
    assert est[0] == pytest.approx(1.0, abs=1e-3)
    assert est[1] == 0.0 and est[2] == 0.0


def test_estimate_dof_constant_curve():
    curve = [(p, RateTriple(5.0, 1.0, 2.0)) for p in (1e4, 1e8)]
    assert estimate_dof(curve).as_floats() == (0.0, 0.0, 0.0)


def test_estimate_dof_affine_in_log():
    curve = [
        (p, RateTriple(3 * 0.5 * math.log2(p) + 7.0, 0.0, 0.0)) for p in (1e4, 1e8)
    ]
    assert estimate_dof(curve).as_floats()[0] == pytest.approx(3.0, rel=1e-12)


def test_estimate_dof_needs_two_points():
    with pytest.raises(ValidationError):
        estimate_dof([(1e6, RateTriple(1.0, 0.0, 0.0))])
    with pytest.raises(ValidationError):
        estimate_dof(
            [(1e6, RateTriple(1.0, 0.0, 0.0)), (1e6, RateTriple(1.0, 0.0, 0.0))]
        )
