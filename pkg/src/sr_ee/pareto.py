"""Pareto boundary of the two-operator energy-efficiency region.

A boundary point for weight alpha solves: maximize eta subject to
EE_pt >= alpha * eta and EE_ris >= (1 - alpha) * eta. Feasibility of a
given eta is monotone, so the outer search is a bisection. Each probe
maximizes the backscatter SNR gamma = |phi^H M_hat w|^2 under the primary
sample-average rate cut, by alternating two convex subproblems:

  * transmit step: rows are affine in w because every per-sample effective
    channel h_t = h_hat + conj(c_t) M_hat^H phi is fixed once phi is;
  * phase step: rows are affine in phi with every row a complex multiple of
    the single base vector M_hat w, which the solver exploits for O(N)
    Newton steps.

Both use the same global underestimate |v|^2 >= 2 Re(conj(v_k) v) - |v_k|^2,
tight at the expansion point, so true rate and true gamma never fall below
their surrogates and the alternation is monotone in gamma.

The sample set is shared across every probe of one experiment (common
random numbers): the bisection oracle stays monotone and boundary points
are comparable across alpha.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import metrics
from .channel import DerivedChannel
from .convex import (ConvexSubproblem, SubproblemInfeasible, c2r, r2c,
                     solve_convex)
from .individual import IndividualResult, max_ee_pt, max_ee_ris
from .metrics import (BeamformingSolution, EEPair, SampleSet, SystemParams)
from .numerics import RngStream

LN2 = math.log(2.0)
logger = logging.getLogger(__name__)


class InfeasibleEta(RuntimeError):
    """No starting point satisfies the primary-EE cut at this target."""


@dataclass
class ParetoQuery:
    """Tolerances and budgets for one boundary computation."""

    epsilon: float = 1e-3       # relative bisection tolerance on eta
    kappa_ao: float = 1e-4      # outer alternation stall threshold on gamma
    kappa_sca: float = 1e-5     # inner SCA stall threshold on gamma
    t_opt: int = 200            # sample count for optimization probes
    t_report: int = 10_000      # sample count for reported metrics
    max_depth: int = 40
    max_ao: int = 30
    max_sca: int = 40


@dataclass
class P4Result:
    w: np.ndarray
    phi: np.ndarray
    gamma: float
    rate: float
    ee_bar: float
    objectives: List[float] = field(default_factory=list)
    converged: bool = False


@dataclass
class Anchors:
    """Individual maximizers; their EE values bracket the bisection."""

    pt: IndividualResult
    ris: IndividualResult
    ee_pt_bar: float            # sample-average EE at the PT anchor
    ee_ris_bar: float           # backscatter EE at the RIS anchor
    ris_p4: Optional[P4Result] = None   # RIS anchor as a feasibility result


@dataclass
class ParetoPoint:
    alpha: float
    eta: float                  # largest target certified feasible
    solution: BeamformingSolution
    ee_opt: EEPair              # sample EE on the optimization sample set
    ee: EEPair                  # sample EE on the reporting sample set
    ee_upper: EEPair            # Jensen-bound EE
    gamma: float
    relaxation_gap: float       # max | |phi_n| - 1 | before recovery
    converged: bool = True
    eta_upper: float = math.inf  # smallest target certified infeasible
    relaxed: bool = False       # unit-modulus recovery rejected, phi relaxed


def gamma_threshold(eta: float, alpha: float, params: SystemParams) -> float:
    """Backscatter SNR needed for the RIS side to reach (1 - alpha) eta.

    Inverts EE_ris = B log2(1 + L gamma) / (L N Pr); an exponent past 1024
    bits would overflow a double and is reported as an infinite requirement.
    """
    expo = (1.0 - alpha) * eta * params.L * params.N * params.Pr / params.B
    if expo > 1024.0:
        return math.inf
    return (2.0 ** expo - 1.0) / params.L


def ee_bar_pt(dc: DerivedChannel, sol: BeamformingSolution, S: SampleSet,
              params: SystemParams) -> float:
    """Sample-average primary EE, the quantity the bisection certifies."""
    rate = metrics.rate_primary_samples(dc, sol, S, params.B)
    return metrics.ee_pt(rate, sol, params)


def sca_quadratic_lb(v, vk):
    """Global affine underestimate of |v|^2 around vk, tight at v = vk."""
    return 2.0 * np.real(np.conj(vk) * v) - np.abs(vk) ** 2


def compute_anchors(dc: DerivedChannel, params: SystemParams, S: SampleSet,
                    seed: int) -> Anchors:
    pt = max_ee_pt(dc, params, S, rng=RngStream(seed, 101))
    ris = max_ee_ris(dc, params, S, rng=RngStream(seed, 103))
    sol = ris.solution
    gam = _gamma(dc, sol.w, sol.phi)
    rate = metrics.rate_primary_samples(dc, sol, S, params.B)
    ris_p4 = P4Result(w=sol.w, phi=sol.phi, gamma=gam, rate=rate,
                      ee_bar=metrics.ee_pt(rate, sol, params),
                      objectives=[gam], converged=True)
    return Anchors(pt=pt, ris=ris,
                   ee_pt_bar=pt.ee_sample.ee_pt,
                   ee_ris_bar=ris.ee_sample.ee_ris,
                   ris_p4=ris_p4)


def build_transmit_subproblem(dc: DerivedChannel, S: SampleSet,
                              w_k: np.ndarray, phi: np.ndarray,
                              q: float, r0: float,
                              pmax: float) -> ConvexSubproblem:
    """Linearized transmit step in z = [Re w; Im w].

    Objective rows and rate rows both come from the underestimate of
    |h_t^H w|^2 at w_k; offsets are chosen so every row equals
    1 + |h_t^H w_k|^2 at the expansion point (strictly inside the log
    domain).
    """
    m_c = dc.m_hat.conj().T @ phi
    c = S.samples
    rows = dc.h_hat[None, :] + c.conj()[:, None] * m_c[None, :]
    vk = rows.conj() @ w_k
    bc = 2.0 * vk[:, None] * rows
    A = np.hstack([bc.real, bc.imag])
    e = 1.0 - np.abs(vk) ** 2
    sk = complex(np.vdot(m_c, w_k))
    gobj = 2.0 * c2r(sk * m_c)
    active = q != 0.0 or r0 != 0.0  # alpha*eta = 0 makes the cut vacuous
    return ConvexSubproblem(kind=0, n=2 * m_c.shape[0], gobj=gobj, r2=pmax,
                            rate_active=active, A=A if active else None,
                            e=e if active else None,
                            klog=1.0 / (S.T * LN2), q=q, r0=r0,
                            x0=c2r(w_k))


def build_phase_subproblem(dc: DerivedChannel, S: SampleSet, w: np.ndarray,
                           phi_k: np.ndarray, r0: float) -> ConvexSubproblem:
    """Linearized phase step in z = [Re phi; Im phi], factored rate rows.

    With w fixed, every per-sample row is c2r(kappa_t * M_hat w), so only
    the complex multipliers kappa_t and the base vector are stored.
    """
    x_b = dc.m_hat @ w
    u = complex(np.vdot(dc.h_hat, w))
    c = S.samples
    sk = complex(np.vdot(phi_k, x_b))
    vk = u + c * sk
    coef = 2.0 * c * vk.conj()
    e = 1.0 + 2.0 * (vk.conj() * u).real - np.abs(vk) ** 2
    gobj = 2.0 * c2r(sk.conjugate() * x_b)
    active = r0 != 0.0
    return ConvexSubproblem(kind=1, n=2 * x_b.shape[0], gobj=gobj, r2=1.0,
                            rate_active=active,
                            e=e if active else None,
                            rate_base=x_b if active else None,
                            rate_coef=coef if active else None,
                            klog=1.0 / (S.T * LN2),
                            q=0.0, r0=r0, x0=c2r(phi_k))


def _gamma(dc: DerivedChannel, w: np.ndarray, phi: np.ndarray) -> float:
    return abs(complex(np.vdot(phi, dc.m_hat @ w))) ** 2


def _cut_satisfied(dc, S, params, w, phi, alpha_eta) -> bool:
    sol = BeamformingSolution(w=w, phi=phi)
    rate = metrics.rate_primary_samples(dc, sol, S, params.B)
    p = float(np.real(np.vdot(w, w)))
    return rate >= alpha_eta * (params.mu * p + params.Ps) * (1.0 - 1e-12)


def solve_subproblem_w(dc, S, params, w0, phi, alpha_eta, query,
                       trace: Optional[List[float]] = None):
    """SCA over the transmit vector at fixed phases; monotone in gamma.

    Once the incumbent satisfies the true rate cut, a round whose subsolve
    comes back below it (possible only through numerical slack) is
    discarded, so the returned vector never loses backscatter SNR. A start
    that violates the cut first accepts whatever feasible point the solver
    finds.
    """
    q = alpha_eta * params.mu / params.B
    r0 = alpha_eta * params.Ps / params.B
    w = w0
    gam = _gamma(dc, w, phi)
    guarded = _cut_satisfied(dc, S, params, w, phi, alpha_eta)
    if trace is not None and guarded:
        trace.append(gam)
    for _ in range(query.max_sca):
        sub = build_transmit_subproblem(dc, S, w, phi, q, r0, params.Pmax)
        info = solve_convex(sub)
        w_new = r2c(info.x)
        gam_new = _gamma(dc, w_new, phi)
        if guarded and gam_new < gam:
            break
        gained = gam_new - gam
        w, gam = w_new, gam_new
        if trace is not None:
            trace.append(gam)
        if guarded and gained <= query.kappa_sca * max(gam, 1e-300):
            break
        guarded = True
    return w


def solve_subproblem_phase(dc, S, params, w, phi0, alpha_eta, query,
                           trace: Optional[List[float]] = None):
    """SCA over the relaxed phases at fixed transmit vector."""
    p = float(np.real(np.vdot(w, w)))
    r0 = alpha_eta * (params.mu * p + params.Ps) / params.B
    phi = phi0
    gam = _gamma(dc, w, phi)
    guarded = _cut_satisfied(dc, S, params, w, phi, alpha_eta)
    if trace is not None and guarded:
        trace.append(gam)
    for _ in range(query.max_sca):
        sub = build_phase_subproblem(dc, S, w, phi, r0)
        info = solve_convex(sub)
        phi_new = r2c(info.x)
        gam_new = _gamma(dc, w, phi_new)
        if guarded and gam_new < gam:
            break
        gained = gam_new - gam
        phi, gam = phi_new, gam_new
        if trace is not None:
            trace.append(gam)
        if guarded and gained <= query.kappa_sca * max(gam, 1e-300):
            break
        guarded = True
    return phi


def _run_p4(dc, S, params, alpha_eta, w0, phi0, query) -> P4Result:
    w, phi = w0, phi0
    objs: List[float] = []
    prev = None
    converged = False
    for _ in range(query.max_ao):
        w = solve_subproblem_w(dc, S, params, w, phi, alpha_eta, query)
        phi = solve_subproblem_phase(dc, S, params, w, phi, alpha_eta, query)
        gam = _gamma(dc, w, phi)
        objs.append(gam)
        if prev is not None and gam - prev <= query.kappa_ao * max(prev, 1e-300):
            converged = True
            break
        prev = gam
    sol = BeamformingSolution(w=w, phi=phi)
    rate = metrics.rate_primary_samples(dc, sol, S, params.B)
    return P4Result(w=w, phi=phi, gamma=objs[-1], rate=rate,
                    ee_bar=metrics.ee_pt(rate, sol, params),
                    objectives=objs, converged=converged)


def solve_p4(dc, S, params, alpha, eta, query,
             inits: Sequence[Tuple[np.ndarray, np.ndarray]],
             gamma_stop: float = math.inf) -> P4Result:
    """Maximize gamma under the primary-EE cut alpha * eta.

    Candidate starts are tried in order and the best backscatter SNR wins;
    a start whose repaired rate margin stays negative is skipped. Once some
    start reaches gamma_stop the remaining ones are not run. If none
    survives, the target itself is declared infeasible.
    """
    alpha_eta = alpha * eta
    best: Optional[P4Result] = None
    last = None
    for w0, phi0 in inits:
        try:
            res = _run_p4(dc, S, params, alpha_eta, w0, phi0, query)
        except SubproblemInfeasible as err:
            last = err
            continue
        if best is None or res.gamma > best.gamma:
            best = res
        if best.gamma >= gamma_stop:
            break
    if best is None:
        raise InfeasibleEta(
            f"primary EE target {alpha_eta:.6g} bit/J unreachable") from last
    return best


def check_feasibility(dc, S, params, anchors: Anchors, alpha: float,
                      eta: float, query: ParetoQuery,
                      warm: Optional[P4Result]) -> Tuple[bool, Optional[P4Result]]:
    """One bisection probe: can both operators reach their share of eta?

    Short-circuits when the PT share exceeds the best known primary EE
    (the PT anchor maximizes that metric, so no start could satisfy the
    cut) and, on the other side, when the RIS anchor itself satisfies the
    cut: it maximizes the backscatter SNR unconstrained, so it decides
    feasibility directly.
    """
    gth = gamma_threshold(eta, alpha, params)
    if not math.isfinite(gth):
        return False, None
    if alpha * eta > anchors.ee_pt_bar:
        return False, None
    ris_sc = anchors.ris_p4
    if ris_sc is not None and alpha * eta <= ris_sc.ee_bar:
        return ris_sc.gamma >= gth, ris_sc
    inits = []
    if warm is not None:
        inits.append((warm.w, warm.phi))
    inits.append((anchors.ris.solution.w, anchors.ris.solution.phi))
    inits.append((anchors.pt.solution.w, anchors.pt.solution.phi))
    try:
        res = solve_p4(dc, S, params, alpha, eta, query, inits,
                       gamma_stop=gth)
    except InfeasibleEta:
        return False, None
    return res.gamma >= gth, res


def _recover_unit_modulus(phi: np.ndarray) -> Tuple[np.ndarray, float]:
    mags = np.abs(phi)
    gap = float(np.max(np.abs(mags - 1.0)))
    safe = np.where(mags > 0, mags, 1.0)
    return np.where(mags > 0, phi / safe, 1.0 + 0j), gap


def _pareto_point_raw(dc, S_opt, S_rep, params, alpha, anchors, query,
                      warm: Optional[P4Result] = None
                      ) -> Tuple[ParetoPoint, P4Result]:
    a = min(max(alpha, 1e-3), 1.0 - 1e-3)
    feas, best = check_feasibility(dc, S_opt, params, anchors, a, 0.0,
                                   query, warm)
    if not feas or best is None:
        raise InfeasibleEta(f"no feasible point even at eta = 0 (alpha={a})")
    lo = 0.0
    if best is not None:
        warm = best
    hi = min(anchors.ee_pt_bar / a, anchors.ee_ris_bar / (1.0 - a))
    converged = True
    eta_up = hi if hi <= 0.0 else math.inf
    if hi > 0.0:
        feas, res = check_feasibility(dc, S_opt, params, anchors, a, hi,
                                      query, warm)
        guard = 0
        while feas and guard < 6:
            lo, best, warm = hi, res, res
            hi *= 2.0
            feas, res = check_feasibility(dc, S_opt, params, anchors, a, hi,
                                          query, warm)
            guard += 1
        if feas:
            lo, best = hi, res
            converged = False
        else:
            depth = 0
            while hi - lo > query.epsilon * max(hi, 1e-300):
                if depth >= query.max_depth:
                    converged = False
                    break
                mid = 0.5 * (lo + hi)
                feas, res = check_feasibility(dc, S_opt, params, anchors, a,
                                              mid, query, warm)
                if feas:
                    lo, best, warm = mid, res, res
                else:
                    hi = mid
                depth += 1
            eta_up = hi

    phi_hat, gap = _recover_unit_modulus(best.phi)
    sol = BeamformingSolution(w=best.w, phi=phi_hat)
    relaxed = False
    if gap > 0.0 and lo > 0.0:
        # projection must not break the certified constraints; if it does,
        # keep the relaxed phases and flag the point
        slack = 1.0 - query.epsilon
        e_pt_hat = ee_bar_pt(dc, sol, S_opt, params)
        e_ris_hat = metrics.ee_ris(metrics.rate_secondary(dc, sol, params),
                                   params)
        if e_pt_hat < a * lo * slack or e_ris_hat < (1.0 - a) * lo * slack:
            sol = BeamformingSolution(w=best.w, phi=best.phi)
            relaxed = True
    gamma = _gamma(dc, best.w, sol.phi)
    e_ris = metrics.ee_ris(metrics.rate_secondary(dc, sol, params), params)
    ee_opt = EEPair(ee_bar_pt(dc, sol, S_opt, params), e_ris)
    ee_rep = EEPair(ee_bar_pt(dc, sol, S_rep, params), e_ris)
    ee_ub = EEPair(metrics.ee_pt(
        metrics.rate_primary_upper(dc, sol, params.B), sol, params), e_ris)
    point = ParetoPoint(alpha=a, eta=lo, solution=sol, ee_opt=ee_opt,
                        ee=ee_rep, ee_upper=ee_ub, gamma=gamma,
                        relaxation_gap=gap, converged=converged,
                        eta_upper=eta_up, relaxed=relaxed)
    return point, best


def pareto_point(dc: DerivedChannel, S_opt: SampleSet, S_rep: SampleSet,
                 params: SystemParams, alpha: float, anchors: Anchors,
                 query: Optional[ParetoQuery] = None,
                 warm: Optional[P4Result] = None) -> ParetoPoint:
    """One boundary point; weights are clamped to [1e-3, 1 - 1e-3]."""
    point, _ = _pareto_point_raw(dc, S_opt, S_rep, params, alpha, anchors,
                                 query or ParetoQuery(), warm)
    return point


def _thread_count() -> int:
    raw = os.environ.get("SR_EE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pareto_boundary(dc: DerivedChannel, params: SystemParams,
                    alphas: Sequence[float], seed: int,
                    query: Optional[ParetoQuery] = None
                    ) -> Tuple[List[ParetoPoint], Anchors]:
    """Boundary sweep over weights with shared anchors and sample sets.

    Serial sweeps walk the sorted weights and warm-start each point from
    its neighbor; with SR_EE_THREADS > 1 the points solve independently.
    Weights whose probes fail are logged and skipped.
    """
    query = query or ParetoQuery()
    S_opt = SampleSet.generate(query.t_opt, seed)
    S_rep = SampleSet.generate(query.t_report, seed, stream=13)
    anchors = compute_anchors(dc, params, S_opt, seed)
    points: List[ParetoPoint] = []
    workers = _thread_count()
    order = sorted(alphas)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_pareto_point_raw, dc, S_opt, S_rep, params, a,
                            anchors, query): a
                for a in order
            }
            done = {}
            for fut in as_completed(futures):
                a = futures[fut]
                try:
                    done[a], _ = fut.result()
                except (InfeasibleEta, SubproblemInfeasible) as err:
                    logger.warning("alpha %.4f skipped: %s", a, err)
            points = [done[a] for a in order if a in done]
    else:
        warm = None
        for a in order:
            try:
                point, warm = _pareto_point_raw(dc, S_opt, S_rep, params, a,
                                                anchors, query, warm)
                points.append(point)
            except (InfeasibleEta, SubproblemInfeasible) as err:
                logger.warning("alpha %.4f skipped: %s", a, err)
    return points, anchors
