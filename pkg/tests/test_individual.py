"""Individual EE maximizers: phase alignment, rank-2 direction step,
Lambert-W power allocation, and the two alternating-optimization loops.

Desk-scale instances (M=2, N=2) are checked against exhaustive grids; the
working-point instances check convergence/monotonicity properties that hold
by construction and must never regress.
"""

import math

import numpy as np
import pytest

import helpers
from sr_ee.channel import DerivedChannel
from sr_ee.individual import (DegenerateChannelError, max_ee_pt, max_ee_ris,
                              max_rate_pt, mrt_given_phase, opt_direction,
                              opt_phase, opt_power)
from sr_ee.metrics import (BeamformingSolution, SampleSet, SystemParams,
                           ee_pt, ee_ris, rate_primary_upper, rate_secondary)
from sr_ee.numerics import RngStream, standard_cn

LN2 = math.log(2.0)


def test_opt_phase_single_element():
    dc = DerivedChannel(h_hat=np.zeros(2, dtype=complex),
                        m_hat=np.array([[0.6, 0.8j]], dtype=complex))
    w = np.array([1.0, 0.0], dtype=complex)
    phi, gamma = opt_phase(dc, w)
    assert abs(gamma - 0.6) <= 1e-12
    assert abs(abs(phi[0]) - 1.0) <= 1e-12


def test_opt_phase_known_answer():
    # M w = (1, i)^T: aligned phases give gamma = 2
    dc = DerivedChannel(h_hat=np.zeros(1, dtype=complex),
                        m_hat=np.array([[1.0], [1.0j]], dtype=complex))
    w = np.ones(1, dtype=complex)
    phi, gamma = opt_phase(dc, w)
    assert abs(gamma - 2.0) <= 1e-12
    assert abs(abs(np.vdot(phi, dc.m_hat @ w)) - 2.0) <= 1e-12


def test_opt_phase_triangle_inequality():
    rng = RngStream(314, 1)
    g = rng.generator
    dc = helpers.random_dc(rng, 3, 6)
    w = standard_cn(rng, 3)
    _, gamma = opt_phase(dc, w)
    x = dc.m_hat @ w
    assert abs(gamma - np.sum(np.abs(x))) <= 1e-12 * gamma
    for _ in range(1000):
        phi = np.exp(1j * g.uniform(0.0, 2.0 * np.pi, 6))
        assert abs(np.vdot(phi, x)) <= gamma + 1e-12


def test_opt_phase_beats_dense_grid_n2():
    rng = RngStream(315, 1)
    dc = helpers.random_dc(rng, 2, 2)
    w = standard_cn(rng, 2)
    _, gamma = opt_phase(dc, w)
    x = dc.m_hat @ w
    ang = helpers.phase_grid(360)
    grid = np.abs(np.conj(ang)[:, None] * x[0] + np.conj(ang)[None, :] * x[1])
    assert gamma >= grid.max() - 1e-6 * grid.max()


def test_opt_direction_no_cascade():
    rng = RngStream(316, 1)
    h = standard_cn(rng, 4)
    dc = DerivedChannel(h_hat=h, m_hat=np.zeros((3, 4), dtype=complex))
    v, lam = opt_direction(dc, np.ones(3, dtype=complex))
    assert abs(lam - np.linalg.norm(h) ** 2) <= 1e-10 * lam
    assert abs(abs(np.vdot(v, h)) - np.linalg.norm(h)) <= 1e-10


def test_opt_direction_matches_dense_eig():
    rng = RngStream(317, 1)
    g = rng.generator
    for _ in range(50):
        dc = helpers.random_dc(rng, 4, 5)
        phi = np.exp(1j * g.uniform(0.0, 2.0 * np.pi, 5))
        v, lam = opt_direction(dc, phi)
        mrow = dc.m_hat.conj().T @ phi  # (M_hat^H phi)
        f = np.outer(dc.h_hat, dc.h_hat.conj()) + np.outer(mrow, mrow.conj())
        lam_ref = float(np.linalg.eigvalsh(f)[-1])
        assert abs(lam - lam_ref) <= 1e-10 * max(1.0, lam_ref)
        assert np.linalg.norm(f @ v - lam * v) <= 1e-9 * max(1.0, lam_ref)


def _ee_scalar(p, lam, params):
    return params.B * math.log1p(lam * p) / LN2 / (params.mu * p + params.Ps)


def test_opt_power_edge_cases():
    params = SystemParams.table1()
    assert opt_power(0.0, params) == 0.0
    assert opt_power(-1.0, params) == 0.0
    # weak channel saturates at full power
    weak = opt_power(1e-12, params)
    assert abs(weak - params.Pmax) <= 1e-12 * params.Pmax


def test_opt_power_against_power_grid():
    params = SystemParams.table1(mu=1.0, Ps=1.0, Pmax=10.0)
    lam = 10.0
    p_star = opt_power(lam, params)
    grid = np.linspace(1e-8, params.Pmax, 1_000_000)
    ee_grid = params.B * np.log1p(lam * grid) / LN2 / (grid + 1.0)
    best = float(ee_grid.max())
    assert _ee_scalar(p_star, lam, params) >= best * (1.0 - 1e-6)


def test_opt_power_first_order_condition():
    params = SystemParams.table1()
    lam = 5e3
    p = opt_power(lam, params)
    assert 0.0 < p < params.Pmax
    d = 1e-7 * p
    up = _ee_scalar(p + d, lam, params)
    dn = _ee_scalar(p - d, lam, params)
    ee0 = _ee_scalar(p, lam, params)
    assert up <= ee0 + 1e-10 * ee0
    assert dn <= ee0 + 1e-10 * ee0


def test_opt_power_interior_independent_of_pmax():
    lam = 1e9
    p28 = opt_power(lam, SystemParams.table1(Pmax=helpers.dbm_to_watt(28.0)))
    p30 = opt_power(lam, SystemParams.table1(Pmax=helpers.dbm_to_watt(30.0)))
    assert p28 < helpers.dbm_to_watt(28.0)
    assert abs(p28 - p30) <= 1e-12 * p28


def test_mrt_given_phase():
    rng = RngStream(318, 1)
    g = rng.generator
    dc = helpers.random_dc(rng, 4, 3)
    phi = np.exp(1j * g.uniform(0.0, 2.0 * np.pi, 3))
    params = SystemParams.table1(M=4, N=3)
    w = mrt_given_phase(dc, phi, params.Pmax)
    assert abs(float(np.real(np.vdot(w, w))) - params.Pmax) <= 1e-9 * params.Pmax
    # Cauchy-Schwarz: no feasible u produces a larger cascade magnitude
    got = abs(np.vdot(phi, dc.m_hat @ w))
    for _ in range(100):
        u = standard_cn(rng, 4)
        u *= math.sqrt(params.Pmax) / np.linalg.norm(u)
        assert abs(np.vdot(phi, dc.m_hat @ u)) <= got + 1e-9 * got

    degenerate = DerivedChannel(h_hat=dc.h_hat,
                                m_hat=np.zeros((3, 4), dtype=complex))
    with pytest.raises(DegenerateChannelError):
        mrt_given_phase(degenerate, phi, params.Pmax)


def test_max_ee_pt_no_ris_reduction():
    rng = RngStream(319, 1)
    params = SystemParams.table1(M=4, N=2)
    h = standard_cn(rng, 4) * 1e3
    dc = DerivedChannel(h_hat=h, m_hat=np.zeros((2, 4), dtype=complex))
    S = SampleSet.generate(200, seed=1)
    res = max_ee_pt(dc, params, S)
    lam = float(np.linalg.norm(h) ** 2)
    p_ref = opt_power(lam, params)
    assert abs(res.solution.p - p_ref) <= 1e-8 * p_ref
    want = _ee_scalar(p_ref, lam, params)
    assert abs(res.ee_upper.ee_pt - want) <= 1e-8 * want


def test_max_ee_pt_traces_monotone():
    S = SampleSet.generate(200, seed=0)
    for seed in range(10):
        dc, params = helpers.table1_channel(seed=1000 + seed)
        res = max_ee_pt(dc, params, S)
        assert res.trace.converged
        assert res.trace.iterations <= 500
        assert helpers.nondecreasing(res.trace.objectives)
        res.solution.validate(params)


def test_max_ee_pt_vs_desk_grid():
    S = SampleSet.generate(200, seed=0)
    for seed in (5, 6):
        dc, params = helpers.desk_channel(seed=seed)
        res = max_ee_pt(dc, params, S)
        ref = helpers.ee_pt_grid_max(dc, params)
        assert res.ee_upper.ee_pt >= ref * (1.0 - 0.01)


def test_max_rate_pt_uses_full_power():
    S = SampleSet.generate(200, seed=0)
    dc, params = helpers.table1_channel(seed=4)
    res = max_rate_pt(dc, params, S)
    assert abs(res.solution.p - params.Pmax) <= 1e-9 * params.Pmax
    ee_res = max_ee_pt(dc, params, S)
    r_rate = rate_primary_upper(dc, res.solution, params.B)
    r_ee = rate_primary_upper(dc, ee_res.solution, params.B)
    assert r_rate >= r_ee * (1.0 - 1e-9)


def test_max_ee_ris_siso_reduction():
    rng = RngStream(320, 1)
    params = SystemParams.table1(M=1, N=4)
    dc = helpers.random_dc(rng, 1, 4, scale=10.0)
    S = SampleSet.generate(200, seed=0)
    res = max_ee_ris(dc, params, S)
    assert abs(res.solution.p - params.Pmax) <= 1e-9 * params.Pmax
    gamma2 = params.Pmax * float(np.sum(np.abs(dc.m_hat)) ** 2)
    want = params.B / params.L * math.log1p(params.L * gamma2) / LN2 \
        / (params.N * params.Pr)
    got = ee_ris(rate_secondary(dc, res.solution, params), params)
    assert abs(got - want) <= 1e-9 * want


def test_max_ee_ris_traces_monotone():
    S = SampleSet.generate(200, seed=0)
    for seed in range(10):
        dc, params = helpers.table1_channel(seed=2000 + seed)
        res = max_ee_ris(dc, params, S)
        assert res.trace.converged
        assert helpers.nondecreasing(res.trace.objectives)
        res.solution.validate(params)
        assert res.solution.unit_modulus


def test_max_ee_ris_vs_desk_grid():
    S = SampleSet.generate(200, seed=0)
    for seed in (7, 8):
        dc, params = helpers.desk_channel(seed=seed)
        res = max_ee_ris(dc, params, S)
        got = ee_ris(rate_secondary(dc, res.solution, params), params)
        ref = helpers.ee_ris_grid_max(dc, params)
        assert got >= ref * (1.0 - 0.01)


def test_anchor_cross_dominance():
    # maximizing one objective cannot beat the other objective's maximizer
    S = SampleSet.generate(200, seed=0)
    for seed in (11, 12, 13):
        dc, params = helpers.table1_channel(seed=seed)
        a = max_ee_pt(dc, params, S)
        b = max_ee_ris(dc, params, S)
        ris_at_a = a.ee_upper.ee_ris
        ris_at_b = b.ee_upper.ee_ris
        pt_at_a = a.ee_upper.ee_pt
        pt_at_b = b.ee_upper.ee_pt
        assert ris_at_b >= ris_at_a * (1.0 - 1e-9)
        assert pt_at_a >= pt_at_b * (1.0 - 1e-9)


def test_rng_argument_controls_restarts():
    dc, params = helpers.table1_channel(seed=21)
    S = SampleSet.generate(200, seed=0)
    r1 = max_ee_ris(dc, params, S, rng=RngStream(5, 103))
    r2 = max_ee_ris(dc, params, S, rng=RngStream(5, 103))
    assert np.array_equal(r1.solution.w, r2.solution.w)
    assert np.array_equal(r1.solution.phi, r2.solution.phi)
