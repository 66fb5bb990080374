"""Shared fixtures for the test suite: canonical working-point instances,
grid oracles for the desk-scale problems, and small statistics utilities.

Everything here is deterministic given a seed; channels are drawn through
the same stream layout the runners use (stream 5) so tests and CLI output
can be cross-checked against each other.
"""

import math

import numpy as np

from sr_ee.channel import (ChannelConfig, DerivedChannel, Geometry,
                           path_gains, sample_channels, derive_normalized)
from sr_ee.metrics import (BeamformingSolution, SampleSet, SystemParams,
                           db_to_linear, dbm_to_watt)
from sr_ee.numerics import RngStream, standard_cn

LN2 = math.log(2.0)


def table1_geometry(theta_deg: float = 10.0) -> Geometry:
    return Geometry(d0=300.0, theta=math.radians(theta_deg),
                    h_pt=50.0, h_ris=30.0, fc=3.5e9)


def table1_chan_cfg(m: int = 4, n: int = 64, **kw) -> ChannelConfig:
    return ChannelConfig(k1=db_to_linear(2.0), k2=db_to_linear(10.0),
                         k3=db_to_linear(10.0), m=m, n=n, **kw)


def table1_channel(seed: int, m: int = 4, n: int = 64,
                   theta_deg: float = 10.0, **overrides):
    """One normalized channel draw at the default working point.

    Returns (dc, params). overrides go to SystemParams.table1 (M/N are set
    from m/n automatically).
    """
    params = SystemParams.table1(M=m, N=n, **overrides)
    geom = table1_geometry(theta_deg)
    cfg = table1_chan_cfg(m=m, n=n)
    real = sample_channels(geom, cfg, RngStream(seed, 5))
    return derive_normalized(real, params), params


def table1_betas(theta_deg: float = 10.0):
    return path_gains(table1_geometry(theta_deg))


def desk_params(m: int = 2, n: int = 2, spreading: int = 8) -> SystemParams:
    """Shrunk working point where exhaustive grids are affordable."""
    return SystemParams.table1(M=m, N=n, L=spreading)


def desk_channel(seed: int, m: int = 2, n: int = 2, spreading: int = 8):
    params = desk_params(m=m, n=n, spreading=spreading)
    geom = table1_geometry()
    cfg = table1_chan_cfg(m=m, n=n)
    real = sample_channels(geom, cfg, RngStream(seed, 5))
    return derive_normalized(real, params), params


def random_dc(rng: RngStream, m: int, n: int,
              scale: float = 1.0) -> DerivedChannel:
    """Unstructured CN(0, scale^2) channels for property tests."""
    return DerivedChannel(h_hat=scale * standard_cn(rng, m),
                          m_hat=scale * standard_cn(rng, n, m))


def phase_grid(n_angles: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n_angles) / n_angles)


def sample_rate_se(dc, sol, S, B: float) -> float:
    """Standard error of the sample-average primary rate."""
    u = complex(np.vdot(dc.h_hat, sol.w))
    s = complex(np.vdot(sol.phi, dc.m_hat @ sol.w))
    per = B * np.log1p(np.abs(u + S.samples * s) ** 2) / LN2
    return float(np.std(per, ddof=1) / math.sqrt(S.T))


def ee_pt_grid_max(dc: DerivedChannel, params: SystemParams,
                   n_power: int = 10_000, n_phase: int = 64) -> float:
    """Exhaustive reference for the primary-EE maximum at M=2, N=2.

    For fixed phases the optimal direction is the top eigenvector of
    h h^H + m m^H, so the grid only needs (p, theta_1, theta_2); the
    eigenvalue is taken from a dense solver to stay independent of the
    package kernels.
    """
    if dc.h_hat.shape != (2,) or dc.m_hat.shape != (2, 2):
        raise ValueError("grid oracle is sized for M=2, N=2")
    ang = phase_grid(n_phase)
    lam = np.empty(n_phase * n_phase)
    k = 0
    for a1 in ang:
        for a2 in ang:
            m = np.conj(a1) * dc.m_hat[0] + np.conj(a2) * dc.m_hat[1]
            f = np.outer(dc.h_hat, dc.h_hat.conj()) + np.outer(m, m.conj())
            lam[k] = np.linalg.eigvalsh(f)[-1]
            k += 1
    p = np.linspace(params.Pmax / n_power, params.Pmax, n_power)
    best = 0.0
    for chunk in np.array_split(p, max(1, n_power // 1000)):
        snr = np.outer(chunk, lam)
        ee = params.B * np.log1p(snr) / LN2 / (params.mu * chunk + params.Ps)[:, None]
        best = max(best, float(ee.max()))
    return best


def ee_ris_grid_max(dc: DerivedChannel, params: SystemParams,
                    n_phase: int = 64) -> float:
    """Exhaustive reference for the backscatter-EE maximum at N=2.

    With phases fixed the best transmit vector is full-power MRT on the
    cascade, giving |phi^H M w|^2 = Pmax |M^H phi|^2.
    """
    if dc.m_hat.shape[0] != 2:
        raise ValueError("grid oracle is sized for N=2")
    ang = phase_grid(n_phase)
    best = 0.0
    for a1 in ang:
        for a2 in ang:
            casc = np.conj(a1) * dc.m_hat[0] + np.conj(a2) * dc.m_hat[1]
            g2 = params.Pmax * float(np.real(np.vdot(casc, casc)))
            best = max(best, g2)
    rate = params.B / params.L * math.log1p(params.L * best) / LN2
    return rate / (params.N * params.Pr)


def nondecreasing(trace, slack: float = 1e-9) -> bool:
    arr = np.asarray(trace, dtype=float)
    if arr.size < 2:
        return True
    floor = arr[:-1] - slack * np.maximum(1.0, np.abs(arr[:-1]))
    return bool(np.all(arr[1:] >= floor))


def make_solution(dc: DerivedChannel, rng: RngStream,
                  pmax: float) -> BeamformingSolution:
    m = dc.h_hat.shape[0]
    n = dc.m_hat.shape[0]
    g = rng.generator
    w = standard_cn(rng, m)
    w *= math.sqrt(g.uniform(0.05, 1.0) * pmax) / np.linalg.norm(w)
    phi = np.exp(1j * g.uniform(0.0, 2.0 * np.pi, n))
    return BeamformingSolution(w=w, phi=phi)
