"""Per-device EE maximization: the two anchor points of the EE region.

The PT anchor alternates eigendirection / Lambert-W power / phase alignment
on the Jensen upper-bound objective; the RIS anchor alternates MRT and phase
alignment on the cascade SNR. Both are monotone AO loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .channel import DerivedChannel
from .metrics import BeamformingSolution, EEPair, SampleSet, SystemParams
from .numerics import RngStream, lambert_w0, top_eigpair_rank2


class DegenerateChannelError(RuntimeError):
    """Cascade link is identically zero; the RIS objective is degenerate."""


@dataclass
class AOTrace:
    objectives: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    threshold: float = 0.0


@dataclass
class IndividualResult:
    solution: BeamformingSolution
    ee_upper: EEPair     # primary rate = Jensen bound (the optimized objective)
    ee_sample: EEPair    # primary rate = sample average (the reported metric)
    trace: AOTrace


def opt_phase(dc: DerivedChannel, w: np.ndarray):
    """Phase vector maximizing |phi^H M_hat w| = ||M_hat w||_1.

    Each phi_n cancels the phase of (M_hat w)_n; zero rows get phase 0.
    Returns (phi, gamma_star).
    """
    x = dc.m_hat @ w
    mags = np.abs(x)
    phi = np.where(mags > 0, x / np.where(mags > 0, mags, 1.0), 1.0 + 0j)
    return phi, float(mags.sum())


def opt_direction(dc: DerivedChannel, phi: np.ndarray):
    """Dominant eigenpair of h_hat h_hat^H + M_hat^H phi phi^H M_hat."""
    lam, v = top_eigpair_rank2(dc.h_hat, dc.m_hat.conj().T @ phi)
    return v, lam


def opt_power(lambda_max: float, params: SystemParams) -> float:
    """EE-optimal transmit power for objective log2(1+lambda p)/(mu p + Ps).

    Solved by the Lambert-W stationarity condition and clamped to [0, Pmax].
    Uses the overflow-safe form 1 + lambda p = exp(1 + W(z)),
    z = (lambda Ps - mu)/(mu e), equivalent to the textbook ratio form.
    """
    if lambda_max <= 0.0:
        return 0.0
    z = (lambda_max * params.Ps - params.mu) / (params.mu * math.e)
    w = lambert_w0(z)
    p = (math.exp(1.0 + w) - 1.0) / lambda_max
    return min(max(p, 0.0), params.Pmax)


def mrt_given_phase(dc: DerivedChannel, phi: np.ndarray, pmax: float) -> np.ndarray:
    """Full-power MRT on the effective cascade channel M_hat^H phi."""
    g = dc.m_hat.conj().T @ phi
    ng = float(np.linalg.norm(g))
    if ng <= 0.0:
        raise DegenerateChannelError("cascade channel M_hat^H phi is zero")
    return math.sqrt(pmax) * g / ng


def _ee_pairs(dc, sol, S, params):
    r_ub = metrics.rate_primary_upper(dc, sol, params.B)
    r_sa = metrics.rate_primary_samples(dc, sol, S, params.B)
    r_sec = metrics.rate_secondary(dc, sol, params)
    e_ris = metrics.ee_ris(r_sec, params)
    return (EEPair(metrics.ee_pt(r_ub, sol, params), e_ris),
            EEPair(metrics.ee_pt(r_sa, sol, params), e_ris))


def _random_phases(n: int, rng: RngStream) -> np.ndarray:
    theta = rng.generator.uniform(0.0, 2.0 * math.pi, n)
    return np.exp(1j * theta)


def _run_ao(dc, params, S, kappa, max_iter, phi0, fixed_power):
    """Shared AO loop for the PT maximizer and the rate-max benchmark.

    fixed_power=None uses the Lambert-W power step; otherwise power is pinned
    (benchmark mode). Objective = upper-bound EE (or rate when pinned; both
    are monotone under the same updates since the denominator is constant).
    """
    trace = AOTrace(threshold=kappa)
    phi = phi0
    prev = None
    w = None
    for it in range(1, max_iter + 1):
        v, lam = opt_direction(dc, phi)
        p = params.Pmax if fixed_power is not None else opt_power(lam, params)
        w = math.sqrt(p) * v
        phi, _ = opt_phase(dc, w)
        sol = BeamformingSolution(w=w, phi=phi)
        obj = metrics.ee_pt(metrics.rate_primary_upper(dc, sol, params.B),
                            sol, params)
        trace.objectives.append(obj)
        trace.iterations = it
        if prev is not None:
            if prev == 0.0 and obj == 0.0:
                trace.converged = True
                break
            if prev > 0.0 and (obj - prev) / prev < kappa:
                trace.converged = True
                break
        prev = obj
    sol = BeamformingSolution(w=w, phi=phi)
    ee_ub, ee_sa = _ee_pairs(dc, sol, S, params)
    return IndividualResult(solution=sol, ee_upper=ee_ub, ee_sample=ee_sa,
                            trace=trace)


def max_ee_pt(dc: DerivedChannel, params: SystemParams, S: SampleSet,
              kappa: float = 1e-4, max_iter: int = 500,
              rng: RngStream = None) -> IndividualResult:
    """PT-side anchor: AO over (direction, power, phases) on the upper-bound EE."""
    if rng is None:
        rng = RngStream(S.seed, 101)
    phi0 = _random_phases(dc.m_hat.shape[0], rng)
    return _run_ao(dc, params, S, kappa, max_iter, phi0, fixed_power=None)


def max_rate_pt(dc: DerivedChannel, params: SystemParams, S: SampleSet,
                kappa: float = 1e-4, max_iter: int = 500,
                rng: RngStream = None) -> IndividualResult:
    """Rate-max benchmark: same AO but transmit power pinned at Pmax."""
    if rng is None:
        rng = RngStream(S.seed, 102)
    phi0 = _random_phases(dc.m_hat.shape[0], rng)
    return _run_ao(dc, params, S, kappa, max_iter, phi0,
                   fixed_power=params.Pmax)


def max_ee_ris(dc: DerivedChannel, params: SystemParams, S: SampleSet,
               kappa: float = 1e-4, max_iter: int = 500, restarts: int = 5,
               rng: RngStream = None) -> IndividualResult:
    """RIS-side anchor: alternate MRT and phase alignment on |phi^H M_hat w|^2.

    The product objective is nonconvex, so a few random phase restarts are
    run and the best kept.
    """
    if rng is None:
        rng = RngStream(S.seed, 103)
    n = dc.m_hat.shape[0]
    best = None
    for r in range(max(restarts, 1)):
        phi = _random_phases(n, rng.child(r))
        trace = AOTrace(threshold=kappa)
        prev = None
        w = None
        for it in range(1, max_iter + 1):
            w = mrt_given_phase(dc, phi, params.Pmax)
            phi, gamma = opt_phase(dc, w)
            obj = gamma * gamma
            trace.objectives.append(obj)
            trace.iterations = it
            if prev is not None and prev > 0.0 and (obj - prev) / prev < kappa:
                trace.converged = True
                break
            if prev is not None and prev == 0.0 and obj == 0.0:
                trace.converged = True
                break
            prev = obj
        if best is None or trace.objectives[-1] > best[1].objectives[-1]:
            best = (BeamformingSolution(w=w, phi=phi), trace)
    sol, trace = best
    ee_ub, ee_sa = _ee_pairs(dc, sol, S, params)
    return IndividualResult(solution=sol, ee_upper=ee_ub, ee_sample=ee_sa,
                            trace=trace)
