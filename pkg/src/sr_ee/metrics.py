"""Rates and energy efficiencies for any (channel, beamforming) pair.

The primary rate has two forms: a sample average over backscatter symbol
realizations c_t (common random numbers, one SampleSet per experiment) and
the Jensen upper bound used as the tractable optimization objective. The
backscatter rate carries the 1/L spreading penalty and the L-fold SNR gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .channel import DerivedChannel
from .numerics import RngStream

LN2 = math.log(2.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Scalar system constants. All linear units (W, Hz)."""

    B: float
    L: int
    rho: float
    mu: float
    Ps: float
    Pr: float
    Pmax: float
    sigma2: float
    M: int
    N: int

    def __post_init__(self):
        if min(self.B, self.L, self.Pr, self.Pmax, self.sigma2) <= 0:
            raise ValueError("B, L, Pr, Pmax, sigma2 must be positive")
        if self.Ps < 0:
            raise ValueError("Ps must be >= 0")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        if self.mu < 1.0:
            raise ValueError("amplifier inefficiency mu must be >= 1")
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be >= 1")

    @classmethod
    def table1(cls, **overrides) -> "SystemParams":
        """Default working point: 1 MHz bandwidth, L=128, Ps=39 dBm,
        Pr=10 dBm, Pmax=40 dBm, noise -114 dBm, M=4, N=64."""
        values = dict(
            B=1e6, L=128, rho=1.0, mu=1.2,
            Ps=dbm_to_watt(39.0), Pr=dbm_to_watt(10.0),
            Pmax=dbm_to_watt(40.0), sigma2=dbm_to_watt(-114.0),
            M=4, N=64,
        )
        values.update(overrides)
        return cls(**values)


@dataclass
class BeamformingSolution:
    """Transmit vector w (power p = |w|^2, direction v) and RIS phases phi."""

    w: np.ndarray
    phi: np.ndarray

    @property
    def p(self) -> float:
        return float(np.real(np.vdot(self.w, self.w)))

    @property
    def v(self) -> np.ndarray:
        nw = np.linalg.norm(self.w)
        return self.w / nw if nw > 0 else self.w

    @property
    def unit_modulus(self) -> bool:
        return bool(np.max(np.abs(np.abs(self.phi) - 1.0)) <= 1e-9)

    def validate(self, params: SystemParams, atol: float = 1e-9):
        if self.p > params.Pmax + atol:
            raise ValueError(f"transmit power {self.p} exceeds Pmax {params.Pmax}")
        if np.max(np.abs(self.phi)) > 1.0 + atol:
            raise ValueError("phase coefficients exceed unit modulus")


@dataclass
class SampleSet:
    """T seeded realizations of the backscatter symbol c ~ CN(0,1)."""

    samples: np.ndarray
    T: int
    seed: int
    _re: np.ndarray = field(default=None, repr=False)
    _im: np.ndarray = field(default=None, repr=False)

    @classmethod
    def generate(cls, T: int, seed: int, stream: int = 12) -> "SampleSet":
        rng = RngStream(seed, stream)
        g = rng.generator
        c = (g.standard_normal(T) + 1j * g.standard_normal(T)) / math.sqrt(2.0)
        return cls(samples=c, T=T, seed=seed)

    @property
    def c_re(self) -> np.ndarray:
        if self._re is None:
            self._re = np.ascontiguousarray(self.samples.real)
        return self._re

    @property
    def c_im(self) -> np.ndarray:
        if self._im is None:
            self._im = np.ascontiguousarray(self.samples.imag)
        return self._im


@dataclass
class EEPair:
    ee_pt: float
    ee_ris: float


def _scalars(dc: DerivedChannel, sol: BeamformingSolution):
    """The two scalars every rate reduces to: u = h_hat^H w, s = phi^H M_hat w."""
    u = complex(np.vdot(dc.h_hat, sol.w))
    s = complex(np.vdot(sol.phi, dc.m_hat @ sol.w))
    return u, s


def rate_primary_samples(dc: DerivedChannel, sol: BeamformingSolution,
                         S: SampleSet, B: float) -> float:
    """(B/T) sum_t log2(1 + |(h_hat^H + c_t phi^H M_hat) w|^2)."""
    u, s = _scalars(dc, sol)
    acc = _kernels.rate_logsum(u.real, u.imag, s.real, s.imag, S.c_re, S.c_im)
    return B * acc / (S.T * LN2)


def rate_primary_upper(dc: DerivedChannel, sol: BeamformingSolution,
                       B: float) -> float:
    """Jensen bound B log2(1 + |h_hat^H w|^2 + |phi^H M_hat w|^2)."""
    u, s = _scalars(dc, sol)
    return B * math.log1p(abs(u) ** 2 + abs(s) ** 2) / LN2


def rate_secondary(dc: DerivedChannel, sol: BeamformingSolution,
                   params: SystemParams) -> float:
    """(B/L) log2(1 + L |phi^H M_hat w|^2): spread backscatter rate."""
    _, s = _scalars(dc, sol)
    return params.B / params.L * math.log1p(params.L * abs(s) ** 2) / LN2


def ee_pt(rate: float, sol: BeamformingSolution, params: SystemParams) -> float:
    """Primary EE: rate over mu |w|^2 + Ps."""
    denom = params.mu * sol.p + params.Ps
    if denom <= 0.0:
        return 0.0
    return rate / denom


def ee_ris(rate_sec: float, params: SystemParams) -> float:
    """Backscatter EE: the spread rate already carries 1/L, so divide by N Pr."""
    return rate_sec / (params.N * params.Pr)
