"""Link synthesis: geometry, path loss, Rician fading, normalized channels.

Three links: direct PT->receiver (h, M-vector), PT->RIS (G, N x M), and
RIS->receiver (f, N-vector). Each is Rician with a geometric LoS steering
component and (optionally correlated) NLoS scattering; solvers consume the
noise-normalized pair (h_hat, M_hat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .numerics import RngStream, matrix_sqrt_psd, standard_cn

SPEED_OF_LIGHT = 299792458.0


class PathGains(NamedTuple):
    beta_tr: float
    beta_ts: float
    beta_sr: float


@dataclass(frozen=True)
class Geometry:
    """Node layout: PT at (0,0,h_pt), receiver at (0,d0,0), RIS at
    (d0 sin(theta), d0 cos(theta), h_ris). theta in radians is the angle at
    the PT between the receiver and RIS directions, so the projected
    RIS-receiver separation is d1 = 2 d0 sin(theta/2)."""

    d0: float
    theta: float
    h_pt: float
    h_ris: float
    fc: float
    alpha_tr: float = 2.7
    alpha_ts: float = 2.7
    alpha_sr: float = 2.1

    def __post_init__(self):
        if self.d0 <= 0 or self.fc <= 0:
            raise ValueError("d0 and fc must be positive")
        if not 0.0 <= self.theta < math.pi:
            raise ValueError("theta must lie in [0, pi)")
        if min(self.alpha_tr, self.alpha_ts, self.alpha_sr) < 2.0:
            raise ValueError("path-loss exponents must be >= 2")


@dataclass(frozen=True)
class ChannelConfig:
    """Rician K-factors (linear), NLoS correlation model, array sizes.

    corr_model is "identity" or "exponential" (coefficient corr_r applied as
    R[i,j] = r^|i-j| over the flattened RIS index). nx * nz must equal n; when
    omitted the nearest-square factorization is used.
    """

    k1: float
    k2: float
    k3: float
    m: int
    n: int
    corr_model: str = "identity"
    corr_r: float = 0.0
    nx: Optional[int] = None
    nz: Optional[int] = None

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3) < 0:
            raise ValueError("Rician K-factors must be >= 0")
        if self.corr_model not in ("identity", "exponential"):
            raise ValueError(f"unknown correlation model {self.corr_model!r}")
        if self.corr_model == "exponential" and not 0.0 <= self.corr_r < 1.0:
            raise ValueError("exponential correlation coefficient must be in [0,1)")
        nx, nz = self.nx, self.nz
        if nx is None or nz is None:
            nx, nz = _factor_near_square(self.n)
            object.__setattr__(self, "nx", nx)
            object.__setattr__(self, "nz", nz)
        if self.nx * self.nz != self.n:
            raise ValueError(f"nx*nz = {self.nx * self.nz} != n = {self.n}")


@dataclass
class ChannelRealization:
    h: np.ndarray          # (M,)
    G: np.ndarray          # (N, M)
    f: np.ndarray          # (N,)
    betas: PathGains


@dataclass
class DerivedChannel:
    """Noise-normalized channels: h_hat = h/sigma, M_hat = sqrt(rho) diag(f^H) G / sigma."""

    h_hat: np.ndarray      # (M,)
    m_hat: np.ndarray      # (N, M)


def _factor_near_square(n: int) -> tuple[int, int]:
    nx = int(math.isqrt(n))
    while n % nx:
        nx -= 1
    return nx, n // nx


def path_loss(d: float, alpha: float, fc: float) -> float:
    """beta0 * d^-alpha with beta0 = (lambda / 4 pi)^2."""
    if d <= 0:
        raise ValueError("distance must be positive")
    lam = SPEED_OF_LIGHT / fc
    beta0 = (lam / (4.0 * math.pi)) ** 2
    return beta0 * d ** (-alpha)


def node_positions(geom: Geometry):
    pt = np.array([0.0, 0.0, geom.h_pt])
    rx = np.array([0.0, geom.d0, 0.0])
    ris = np.array([geom.d0 * math.sin(geom.theta),
                    geom.d0 * math.cos(geom.theta),
                    geom.h_ris])
    return pt, rx, ris


def link_distances(geom: Geometry) -> tuple[float, float, float]:
    """(d_TR, d_TS, d_SR) between PT-receiver, PT-RIS, RIS-receiver."""
    pt, rx, ris = node_positions(geom)
    return (float(np.linalg.norm(pt - rx)),
            float(np.linalg.norm(pt - ris)),
            float(np.linalg.norm(ris - rx)))


def path_gains(geom: Geometry) -> PathGains:
    d_tr, d_ts, d_sr = link_distances(geom)
    return PathGains(path_loss(d_tr, geom.alpha_tr, geom.fc),
                     path_loss(d_ts, geom.alpha_ts, geom.fc),
                     path_loss(d_sr, geom.alpha_sr, geom.fc))


def correlation_matrix(cfg: ChannelConfig) -> Optional[np.ndarray]:
    """RIS-side NLoS correlation R (unit diagonal), or None for identity."""
    if cfg.corr_model == "identity":
        return None
    idx = np.arange(cfg.n)
    return cfg.corr_r ** np.abs(idx[:, None] - idx[None, :])


def _steer_ula(m: int, ux: float) -> np.ndarray:
    # half-wavelength ULA along the x axis
    return np.exp(1j * math.pi * np.arange(m) * ux)


def _steer_upa(nx: int, nz: int, ux: float, uz: float) -> np.ndarray:
    # half-wavelength nx x nz UPA on the xOz plane, flattened z-major
    # (element n = iz * nx + ix)
    px = math.pi * np.arange(nx) * ux
    pz = math.pi * np.arange(nz) * uz
    return np.exp(1j * (pz[:, None] + px[None, :])).ravel()


def los_components(geom: Geometry, cfg: ChannelConfig):
    """Unit-modulus LoS steering parts (h_los, G_los, f_los)."""
    pt, rx, ris = node_positions(geom)

    def unit(a, b):
        d = b - a
        return d / np.linalg.norm(d)

    u_pt_rx = unit(pt, rx)
    u_pt_ris = unit(pt, ris)
    u_ris_rx = unit(ris, rx)
    u_ris_pt = unit(ris, pt)

    h_los = _steer_ula(cfg.m, u_pt_rx[0])
    f_los = _steer_upa(cfg.nx, cfg.nz, u_ris_rx[0], u_ris_rx[2])
    a_ris = _steer_upa(cfg.nx, cfg.nz, u_ris_pt[0], u_ris_pt[2])
    a_pt = _steer_ula(cfg.m, u_pt_ris[0])
    G_los = np.outer(a_ris, a_pt.conj())
    return h_los, G_los, f_los


def sample_channels(geom: Geometry, cfg: ChannelConfig,
                    rng: RngStream) -> ChannelRealization:
    """One Rician draw of (h, G, f). Draw order is fixed (h, then G, then f)
    so identical streams give identical realizations."""
    betas = path_gains(geom)
    h_los, G_los, f_los = los_components(geom, cfg)
    R = correlation_matrix(cfg)
    R_half = matrix_sqrt_psd(R) if R is not None else None

    def mix(k, los, nlos):
        return math.sqrt(k / (k + 1.0)) * los + math.sqrt(1.0 / (k + 1.0)) * nlos

    h_nlos = standard_cn(rng, cfg.m)
    g_nlos = standard_cn(rng, cfg.n, cfg.m)
    f_nlos = standard_cn(rng, cfg.n)
    if R_half is not None:
        g_nlos = R_half @ g_nlos
        f_nlos = R_half @ f_nlos

    h = math.sqrt(betas.beta_tr) * mix(cfg.k1, h_los, h_nlos)
    G = math.sqrt(betas.beta_ts) * mix(cfg.k2, G_los, g_nlos)
    f = math.sqrt(betas.beta_sr) * mix(cfg.k3, f_los, f_nlos)
    return ChannelRealization(h=h, G=G, f=f, betas=betas)


def derive_normalized(real: ChannelRealization, params) -> DerivedChannel:
    """h_hat = h/sigma and M_hat with row n = sqrt(rho) f_n^* g_n^T / sigma."""
    sigma = math.sqrt(params.sigma2)
    if sigma <= 0:
        raise ValueError("noise power must be positive")
    h_hat = real.h / sigma
    m_hat = math.sqrt(params.rho) * (real.f.conj()[:, None] * real.G) / sigma
    return DerivedChannel(h_hat=h_hat, m_hat=m_hat)
