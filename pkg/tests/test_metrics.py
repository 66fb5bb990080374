"""Rate and energy-efficiency evaluators.

Includes the fixed-denominator goldens (9.143 W primary, 0.64 W RIS at the
default working point), the exact inversion of the spread backscatter rate,
Jensen-gap direction, sample-average convergence, and noise-rescaling
invariance of the normalized channels.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

import helpers
from sr_ee.channel import DerivedChannel, derive_normalized, sample_channels
from sr_ee.metrics import (BeamformingSolution, SampleSet, SystemParams,
                           db_to_linear, dbm_to_watt, ee_pt, ee_ris,
                           rate_primary_samples, rate_primary_upper,
                           rate_secondary)
from sr_ee.numerics import RngStream

LN2 = math.log(2.0)


def test_unit_conversions():
    assert abs(dbm_to_watt(30.0) - 1.0) <= 1e-12
    assert abs(dbm_to_watt(10.0) - 0.01) <= 1e-14
    assert abs(dbm_to_watt(39.0) - 10.0**0.9) <= 1e-12  # 7.943 W
    assert abs(db_to_linear(0.0) - 1.0) == 0.0


def test_params_validation():
    SystemParams.table1(mu=1.0)  # boundary value is legal
    with pytest.raises(ValueError):
        SystemParams.table1(mu=0.99)
    with pytest.raises(ValueError):
        SystemParams.table1(rho=0.0)
    with pytest.raises(ValueError):
        SystemParams.table1(M=0)


def test_table1_values():
    p = SystemParams.table1()
    assert (p.B, p.L, p.M, p.N) == (1e6, 128, 4, 64)
    assert abs(p.Ps - dbm_to_watt(39.0)) == 0.0
    assert abs(p.Pr - 0.01) <= 1e-15
    assert abs(p.Pmax - 10.0) <= 1e-12
    assert abs(p.sigma2 - dbm_to_watt(-114.0)) == 0.0


def test_solution_properties():
    w = np.array([3.0, 4.0j])
    phi = np.ones(2, dtype=complex)
    sol = BeamformingSolution(w=w, phi=phi)
    assert abs(sol.p - 25.0) <= 1e-12
    assert abs(np.linalg.norm(sol.v) - 1.0) <= 1e-12
    assert sol.unit_modulus

    params = SystemParams.table1()
    with pytest.raises(ValueError):
        BeamformingSolution(w=math.sqrt(params.Pmax + 1.0) * np.ones(1),
                            phi=phi).validate(params)
    with pytest.raises(ValueError):
        BeamformingSolution(w=np.ones(1), phi=1.5 * phi).validate(params)


def test_sample_set():
    a = SampleSet.generate(4096, seed=9)
    b = SampleSet.generate(4096, seed=9)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.c_re, a.samples.real)

    big = SampleSet.generate(100_000, seed=10)
    assert abs(np.mean(big.samples)) <= 4.0 / math.sqrt(big.T)
    assert abs(np.mean(np.abs(big.samples) ** 2) - 1.0) <= 0.05


def test_zero_beamformer_rates():
    rng = RngStream(41, 1)
    dc = helpers.random_dc(rng, 3, 5)
    sol = BeamformingSolution(w=np.zeros(3, dtype=complex),
                              phi=np.ones(5, dtype=complex))
    S = SampleSet.generate(64, seed=1)
    assert rate_primary_samples(dc, sol, S, 1e6) == 0.0
    assert rate_primary_upper(dc, sol, 1e6) == 0.0
    assert rate_secondary(dc, sol, SystemParams.table1(M=3, N=5)) == 0.0


def test_direct_link_only_ignores_samples():
    # M_hat = 0 removes the backscatter term entirely
    rng = RngStream(42, 1)
    h = helpers.random_dc(rng, 4, 2).h_hat
    dc = DerivedChannel(h_hat=h, m_hat=np.zeros((2, 4), dtype=complex))
    sol = helpers.make_solution(dc, RngStream(43, 1), pmax=10.0)
    r1 = rate_primary_samples(dc, sol, SampleSet.generate(32, seed=1), 1e6)
    r2 = rate_primary_samples(dc, sol, SampleSet.generate(512, seed=77), 1e6)
    want = 1e6 * math.log1p(abs(np.vdot(h, sol.w)) ** 2) / LN2
    assert abs(r1 - r2) <= 1e-9 * want
    assert abs(r1 - want) <= 1e-9 * want
    assert abs(rate_primary_upper(dc, sol, 1e6) - want) <= 1e-9 * want


def test_sample_average_converges():
    dc, params = helpers.table1_channel(seed=303)
    sol = helpers.make_solution(dc, RngStream(304, 1), params.Pmax)
    ref = rate_primary_samples(dc, sol, SampleSet.generate(10_000_000, seed=5),
                               params.B)
    S = SampleSet.generate(100_000, seed=6)
    got = rate_primary_samples(dc, sol, S, params.B)
    se = helpers.sample_rate_se(dc, sol, S, params.B)
    assert abs(got - ref) <= 3.0 * se


def test_jensen_upper_bound():
    rng = RngStream(505, 1)
    S = SampleSet.generate(10_000, seed=12)
    for _ in range(25):
        dc = helpers.random_dc(rng, 3, 4)
        sol = helpers.make_solution(dc, rng, pmax=5.0)
        lo = rate_primary_samples(dc, sol, S, 1e6)
        hi = rate_primary_upper(dc, sol, 1e6)
        se = helpers.sample_rate_se(dc, sol, S, 1e6)
        assert lo <= hi + 3.0 * se


def test_upper_bound_tight_without_backscatter():
    rng = RngStream(506, 1)
    dc = helpers.random_dc(rng, 4, 3)
    sol = helpers.make_solution(dc, rng, pmax=10.0)
    sol.phi[:] = 0.0  # s = 0 makes Jensen exact
    S = SampleSet.generate(128, seed=3)
    lo = rate_primary_samples(dc, sol, S, 1e6)
    hi = rate_primary_upper(dc, sol, 1e6)
    assert abs(lo - hi) <= 1e-12 * max(1.0, hi)


def test_rate_secondary_inversion():
    # |s|^2 = (2^128 - 1)/128 with L = 128, B = 1 MHz gives exactly 1 Mb/s
    params = SystemParams.table1(M=1, N=1)
    target = (2.0**128 - 1.0) / 128.0
    dc = DerivedChannel(h_hat=np.zeros(1, dtype=complex),
                        m_hat=np.array([[math.sqrt(target)]], dtype=complex))
    sol = BeamformingSolution(w=np.ones(1, dtype=complex),
                              phi=np.ones(1, dtype=complex))
    rate = rate_secondary(dc, sol, params)
    assert abs(rate - 1e6) <= 1e-6


def test_rate_secondary_unnormalized_oracle():
    # recompute from raw (h, G, f) without the normalized cascade
    params = SystemParams.table1(M=3, N=4, rho=0.8)
    geom = helpers.table1_geometry()
    cfg = helpers.table1_chan_cfg(m=3, n=4)
    real = sample_channels(geom, cfg, RngStream(21, 5))
    dc = derive_normalized(real, params)
    sol = helpers.make_solution(dc, RngStream(22, 1), params.Pmax)

    lin = np.sum(np.conj(sol.phi) * np.conj(real.f) * (real.G @ sol.w))
    snr = params.rho * abs(lin) ** 2 / params.sigma2
    want = params.B / params.L * math.log1p(params.L * snr) / LN2
    got = rate_secondary(dc, sol, params)
    assert abs(got - want) <= 1e-9 * want


def test_ee_denominators():
    params = SystemParams.table1()
    # mu * 1 W + Ps = 1.2 + 7.943 = 9.143 W
    w = np.ones(1, dtype=complex)
    sol = BeamformingSolution(w=w, phi=np.ones(1, dtype=complex))
    rate = 9.143
    denom_ee = ee_pt(rate, sol, params)
    assert abs(denom_ee - rate / (params.mu + params.Ps)) == 0.0
    assert abs((params.mu + params.Ps) - 9.143282347242815) <= 1e-12

    # N Pr = 64 * 10 mW = 0.64 W
    assert abs(ee_ris(0.64, params) - 1.0) <= 1e-12


def test_ee_edge_cases():
    params = SystemParams.table1(Ps=0.0)
    sol = BeamformingSolution(w=np.zeros(2, dtype=complex),
                              phi=np.ones(1, dtype=complex))
    assert ee_pt(1.0, sol, params) == 0.0  # zero denominator guarded
    assert ee_pt(0.0, sol, SystemParams.table1()) == 0.0


def test_ee_ris_monotone_in_backscatter_power():
    params = SystemParams.table1(M=1, N=1)
    rates = []
    for s2 in [0.5, 1.0, 4.0, 9.0]:
        dc = DerivedChannel(h_hat=np.zeros(1, dtype=complex),
                            m_hat=np.array([[math.sqrt(s2)]], dtype=complex))
        sol = BeamformingSolution(w=np.ones(1, dtype=complex),
                                  phi=np.ones(1, dtype=complex))
        rates.append(ee_ris(rate_secondary(dc, sol, params), params))
    assert all(a < b for a, b in zip(rates, rates[1:]))


def test_noise_rescaling_invariance():
    # scaling sigma, h and f together leaves the normalized channels alone
    params = SystemParams.table1(M=3, N=4)
    geom = helpers.table1_geometry()
    cfg = helpers.table1_chan_cfg(m=3, n=4)
    real = sample_channels(geom, cfg, RngStream(31, 5))
    dc = derive_normalized(real, params)

    c = 3.7
    scaled = replace(real, h=c * real.h, f=c * real.f)
    params2 = replace(params, sigma2=c * c * params.sigma2)
    dc2 = derive_normalized(scaled, params2)
    assert np.allclose(dc.h_hat, dc2.h_hat)
    assert np.allclose(dc.m_hat, dc2.m_hat)

    sol = helpers.make_solution(dc, RngStream(32, 1), params.Pmax)
    S = SampleSet.generate(256, seed=2)
    assert abs(rate_primary_samples(dc, sol, S, params.B)
               - rate_primary_samples(dc2, sol, S, params.B)) <= 1e-9
    assert abs(rate_secondary(dc, sol, params)
               - rate_secondary(dc2, sol, params2)) <= 1e-9
