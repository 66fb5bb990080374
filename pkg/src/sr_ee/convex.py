"""Log-barrier solver for the alternating convex subproblems.

Both directions of the boundary search reduce to one template: maximize a
linear objective over either a Euclidean ball (transmit vector, squared
radius = power budget) or per-coordinate-pair modulus caps (relaxed phase
vector), optionally intersected with a sample-average rate constraint whose
log arguments are affine in the real-stacked variable,

    Rv(x) = klog * sum_t ln(e_t + a_t . x) - q |x|^2 - r0 >= 0.

The phase direction carries extra structure: every rate row and the
objective are complex multiples of one base vector, so the Newton system is
a pair-block-diagonal matrix plus a rank-2 correction and solves in O(n) by
the matrix inversion lemma. The transmit direction uses dense Newton steps
through the shared kernel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ._kernels import barrier_fgh

BARRIER_MULT = 30.0
NEWTON_TOL = 1e-9        # stop centering when lambda^2 / 2 falls below this
GAP_REL = 1e-6           # target duality gap relative to the objective scale
MAX_NEWTON = 200
MAX_STAGES = 64
ARMIJO = 0.25
POLISH_TOL = 1e-13
START_MARGIN = 0.02


class SubproblemInfeasible(RuntimeError):
    """No strictly feasible point was found for a subproblem.

    `best_margin` carries the largest rate margin reached by the projected
    ascent, as a certificate of how badly the constraint fails.
    """

    def __init__(self, msg: str, best_margin: Optional[float] = None):
        super().__init__(msg)
        self.best_margin = best_margin


def c2r(v: np.ndarray) -> np.ndarray:
    """Stack a complex vector as [real; imag]."""
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag]).astype(float)


def r2c(z: np.ndarray) -> np.ndarray:
    """Inverse of c2r."""
    h = z.shape[0] // 2
    return z[:h] + 1j * z[h:]


@dataclass
class ConvexSubproblem:
    """One SCA subproblem in real-stacked coordinates.

    kind 0 constrains |x|^2 <= r2 globally; kind 1 constrains each pair
    (x_j, x_{j+n/2}) to squared modulus <= r2. The rate rows are given
    either densely (`A`) or factored as rows c2r(rate_coef[t] * rate_base),
    in which case `A` stays None and the O(n) path is used.
    """

    kind: int
    n: int
    gobj: np.ndarray
    r2: float
    rate_active: bool = False
    A: Optional[np.ndarray] = None
    e: Optional[np.ndarray] = None
    rate_base: Optional[np.ndarray] = None
    rate_coef: Optional[np.ndarray] = None
    klog: float = 0.0
    q: float = 0.0
    r0: float = 0.0
    eps_dom: float = 1e-9
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in (0, 1):
            raise ValueError("kind must be 0 (ball) or 1 (pair caps)")
        if self.kind == 1 and self.n % 2:
            raise ValueError("pair caps need an even dimension")
        if not (self.r2 > 0.0):
            raise ValueError("r2 must be positive")
        self.gobj = np.asarray(self.gobj, dtype=float)
        if self.gobj.shape != (self.n,):
            raise ValueError("gobj shape mismatch")
        if self.rate_active:
            if self.e is None:
                raise ValueError("rate rows need offsets e")
            self.e = np.asarray(self.e, dtype=float)
            if self.A is not None:
                self.A = np.ascontiguousarray(self.A, dtype=float)
                if self.A.shape != (self.e.shape[0], self.n):
                    raise ValueError("A shape mismatch")
            else:
                if self.rate_base is None or self.rate_coef is None:
                    raise ValueError("factored rows need base and coef")
                if self.q != 0.0:
                    raise ValueError("factored path assumes q == 0")
                if 2 * self.rate_base.shape[0] != self.n:
                    raise ValueError("rate_base length mismatch")


@dataclass
class SolveInfo:
    x: np.ndarray
    obj: float
    gap: float
    kkt_res: float
    steps: int
    status: str


def _pair_split(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    h = z.shape[0] // 2
    return z[:h], z[h:]


def _shrink_into(z: np.ndarray, kind: int, r2: float, margin: float = 1e-9) -> np.ndarray:
    """Pull a point strictly inside the ball / pair caps."""
    z = z.astype(float).copy()
    rin2 = r2 * (1.0 - margin)
    if kind == 0:
        nn = float(z @ z)
        if nn > rin2:
            z *= math.sqrt(rin2 / nn)
    else:
        a, b = _pair_split(z)
        nn = a * a + b * b
        bad = nn > rin2
        if np.any(bad):
            scale = np.sqrt(rin2 / nn[bad])
            a[bad] *= scale
            b[bad] *= scale
    return z


def _project_caps(z: np.ndarray, kind: int, r2_in: float) -> np.ndarray:
    """Euclidean projection onto the (shrunk) ball or pair caps."""
    z = z.copy()
    if kind == 0:
        nn = float(z @ z)
        if nn > r2_in:
            z *= math.sqrt(r2_in / nn)
    else:
        a, b = _pair_split(z)
        nn = a * a + b * b
        bad = nn > r2_in
        if np.any(bad):
            scale = np.sqrt(r2_in / nn[bad])
            a[bad] *= scale
            b[bad] *= scale
    return z


def _closed_form(sub: ConvexSubproblem) -> SolveInfo:
    g = sub.gobj
    rad = math.sqrt(sub.r2)
    if sub.kind == 0:
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            x = sub.x0.astype(float).copy() if sub.x0 is not None else np.zeros(sub.n)
            x = _project_caps(x, 0, sub.r2)
        else:
            x = (rad / gn) * g
    else:
        h = sub.n // 2
        ga, gb = g[:h], g[h:]
        norms = np.hypot(ga, gb)
        x = np.empty(sub.n)
        ok = norms > 0.0
        x[:h] = np.where(ok, rad * ga / np.where(ok, norms, 1.0), 0.0)
        x[h:] = np.where(ok, rad * gb / np.where(ok, norms, 1.0), 0.0)
        if not np.all(ok):
            if sub.x0 is not None:
                x0 = _project_caps(sub.x0.astype(float), 1, sub.r2)
                x[:h] = np.where(ok, x[:h], x0[:h])
                x[h:] = np.where(ok, x[h:], x0[h:])
            else:
                x[:h] = np.where(ok, x[:h], rad)
    return SolveInfo(x=x, obj=float(g @ x), gap=0.0, kkt_res=0.0, steps=0,
                     status="closed_form")


def _make_ops(sub: ConvexSubproblem):
    """Return (mv, rmv) computing A @ z and A.T @ y for either layout."""
    if sub.A is not None:
        A = sub.A
        return (lambda z: A @ z), (lambda y: A.T @ y)
    K = np.column_stack([sub.rate_coef.real, sub.rate_coef.imag])
    U = np.column_stack([c2r(sub.rate_base), c2r(1j * sub.rate_base)])
    return (lambda z: K @ (U.T @ z)), (lambda y: U @ (K.T @ y))


def _feasible_start(sub: ConvexSubproblem, mv, rmv) -> np.ndarray:
    """Strictly feasible point, repairing the rate margin by projected ascent.

    The rate margin Rv is concave, so projected gradient ascent inside the
    (slightly shrunk) trust region either clears the required margin or
    stalls near the constrained maximum, which certifies infeasibility.
    """
    x = np.zeros(sub.n) if sub.x0 is None else np.asarray(sub.x0, dtype=float)
    # a few percent of cap slack keeps the initial Hessian well conditioned;
    # the barrier path walks back to the boundary as t grows
    x = _shrink_into(x, sub.kind, sub.r2, margin=START_MARGIN)
    if not sub.rate_active:
        return x

    rin2 = sub.r2 * (1.0 - 1e-9)
    rv_need = 1e-9 * max(1.0, abs(sub.r0))

    def margin(z):
        s = sub.e + mv(z)
        if np.any(s <= 2.0 * sub.eps_dom):
            return -math.inf, None
        rv = sub.klog * float(np.log(s).sum()) - sub.q * float(z @ z) - sub.r0
        return rv, s

    rv, s = margin(x)
    if rv >= rv_need:
        return x
    if not math.isfinite(rv):
        raise SubproblemInfeasible("expansion point violates the log domain")

    step = 1.0
    for _ in range(800):
        grad = sub.klog * rmv(1.0 / s) - (2.0 * sub.q) * x
        gn = float(np.linalg.norm(grad))
        if gn < 1e-15:
            break
        improved = False
        while step > 1e-18:
            cand = _project_caps(x + step * grad, sub.kind, rin2)
            rv_c, s_c = margin(cand)
            if rv_c > rv:
                x, rv, s = cand, rv_c, s_c
                step *= 2.0
                improved = True
                break
            step *= 0.5
        if rv >= rv_need:
            return x
        if not improved:
            break
    raise SubproblemInfeasible(
        "rate constraint infeasible over the trust region "
        f"(best margin {rv:.3e})", best_margin=rv)


def _center_dense(x: np.ndarray, sub: ConvexSubproblem, t: float,
                  grad: np.ndarray, hess: np.ndarray,
                  tol: float = NEWTON_TOL) -> Tuple[np.ndarray, np.ndarray, int]:
    """Newton centering for the dense layout; returns (x, grad, steps)."""
    n = sub.n
    A = sub.A if sub.A is not None else np.zeros((0, n))
    e = sub.e if sub.e is not None else np.zeros(0)
    rate = 1 if sub.rate_active else 0
    steps = 0
    for _ in range(MAX_NEWTON):
        psi, ok = barrier_fgh(x, sub.gobj, A, e, sub.klog, sub.q, sub.r0,
                              sub.eps_dom, sub.kind, sub.r2, t, rate, 1,
                              grad, hess)
        if not ok:
            raise RuntimeError("centering left the barrier domain")
        scale = max(1.0, float(np.trace(hess)) / n)
        delta = None
        for jit in (0.0, 1e-12, 1e-9, 1e-6):
            try:
                delta = np.linalg.solve(
                    hess + (jit * scale) * np.eye(n) if jit else hess, -grad)
            except np.linalg.LinAlgError:
                continue
            if float(grad @ delta) < 0.0:
                break
            delta = None
        if delta is None:
            break
        lam2 = -float(grad @ delta)
        if 0.5 * lam2 <= tol:
            break
        alpha = 1.0
        slope = float(grad @ delta)
        accepted = False
        while alpha > 1e-18:
            cand = x + alpha * delta
            psi_c, okc = barrier_fgh(cand, sub.gobj, A, e, sub.klog, sub.q,
                                     sub.r0, sub.eps_dom, sub.kind, sub.r2,
                                     t, rate, 0, grad, hess)
            if okc and psi_c <= psi + ARMIJO * alpha * slope:
                x = cand
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        steps += 1
    # refresh gradient at the final iterate
    barrier_fgh(x, sub.gobj, A, e, sub.klog, sub.q, sub.r0, sub.eps_dom,
                sub.kind, sub.r2, t, rate, 1, grad, hess)
    return x, grad, steps


def _factored_eval(z, sub, K, U, t, need_grad):
    """Barrier value (and pieces) for the factored pair-cap layout."""
    h = sub.n // 2
    a, b = _pair_split(z)
    sb = sub.r2 - a * a - b * b
    if np.any(sb <= 0.0):
        return None
    s = sub.e + K @ (U.T @ z)
    sd = s - sub.eps_dom
    if np.any(sd <= 0.0):
        return None
    rv = sub.klog * float(np.log(s).sum()) - sub.r0
    if rv <= 0.0:
        return None
    psi = (-t * float(sub.gobj @ z) - float(np.log(sb).sum())
           - float(np.log(sd).sum()) - math.log(rv))
    if not need_grad:
        return psi, None, None, None, None
    c1 = 2.0 / sb
    inv_s = 1.0 / s
    cr = sub.klog * (K.T @ inv_s)                 # 2-vector, grad_rv = U @ cr
    g = -t * sub.gobj.copy()
    g[:h] += c1 * a
    g[h:] += c1 * b
    g -= U @ (K.T @ (1.0 / sd))
    g -= (U @ cr) / rv
    return psi, g, (sb, c1), (s, sd, inv_s, cr, rv), None


def _center_factored(z: np.ndarray, sub: ConvexSubproblem, t: float,
                     K: np.ndarray, U: np.ndarray,
                     tol: float = NEWTON_TOL) -> Tuple[np.ndarray, np.ndarray, int]:
    """O(n) Newton centering: pair-block diagonal plus rank-2 correction."""
    h = sub.n // 2
    steps = 0
    out = _factored_eval(z, sub, K, U, t, True)
    if out is None:
        raise RuntimeError("centering left the barrier domain")
    for _ in range(MAX_NEWTON):
        psi, g, ball, rate_bits, _ = out
        sb, c1 = ball
        s, sd, inv_s, cr, rv = rate_bits
        a, b = _pair_split(z)
        c2 = 4.0 / (sb * sb)
        d11 = c1 + c2 * a * a
        d22 = c1 + c2 * b * b
        d12 = c2 * a * b
        det = d11 * d22 - d12 * d12

        def binv(v):
            v1, v2 = v[:h], v[h:]
            return np.concatenate([(d22 * v1 - d12 * v2) / det,
                                   (-d12 * v1 + d11 * v2) / det])

        wrow = 1.0 / (sd * sd) + (sub.klog * inv_s * inv_s) / rv
        C = K.T @ (K * wrow[:, None]) + np.outer(cr, cr) / (rv * rv)
        big = binv(g)
        BU = np.column_stack([binv(U[:, 0]), binv(U[:, 1])])
        W2 = U.T @ BU
        M2 = np.eye(2) + C @ W2
        sol2 = np.linalg.solve(M2, C @ (U.T @ big))
        delta = -(big - BU @ sol2)
        lam2 = -float(g @ delta)
        if lam2 <= 0.0 or 0.5 * lam2 <= tol:
            break
        alpha = 1.0
        slope = float(g @ delta)
        accepted = None
        while alpha > 1e-18:
            cand = z + alpha * delta
            trial = _factored_eval(cand, sub, K, U, t, True)
            if trial is not None and trial[0] <= psi + ARMIJO * alpha * slope:
                accepted = (cand, trial)
                break
            alpha *= 0.5
        if accepted is None:
            break
        z, out = accepted
        steps += 1
    return z, out[1], steps


def solve_convex(sub: ConvexSubproblem) -> SolveInfo:
    """Maximize gobj . x over the trust region (and rate cut when active)."""
    if not sub.rate_active:
        return _closed_form(sub)

    mv, rmv = _make_ops(sub)
    x = _feasible_start(sub, mv, rmv)
    T = sub.e.shape[0]
    m_cons = (1 if sub.kind == 0 else sub.n // 2) + T + 1
    span = math.sqrt(sub.r2 * (sub.n // 2 if sub.kind == 1 else 1.0))
    S = max(1.0, float(np.linalg.norm(sub.gobj)) * span)
    eps_gap = GAP_REL * S

    # seed the path from the start's cap-relaxation gap: a warm start that
    # is already near-optimal lands on a late stage instead of being dragged
    # back to the analytic center and re-walking the whole path
    root = math.sqrt(sub.r2)
    if sub.kind == 0:
        ub = float(np.linalg.norm(sub.gobj)) * root
    else:
        ga, gb = _pair_split(sub.gobj)
        ub = root * float(np.hypot(ga, gb).sum())
    gap0 = max(ub - float(sub.gobj @ x), eps_gap)
    t = max(1.0, m_cons / gap0)

    factored = sub.A is None
    if factored:
        K = np.column_stack([sub.rate_coef.real, sub.rate_coef.imag])
        U = np.column_stack([c2r(sub.rate_base), c2r(1j * sub.rate_base)])
        grad = None
    else:
        grad = np.empty(sub.n)
        hess = np.empty((sub.n, sub.n))

    steps_total = 0
    status = "optimal"
    stages = 0
    while True:
        if factored:
            x, glast, steps = _center_factored(x, sub, t, K, U)
        else:
            x, glast, steps = _center_dense(x, sub, t, grad, hess)
        steps_total += steps
        gap = m_cons / t
        if gap <= eps_gap:
            break
        if steps >= MAX_NEWTON:
            # centering stalled; larger t only worsens the conditioning
            status = "stalled"
            break
        stages += 1
        if stages >= MAX_STAGES:
            status = "max_stages"
            break
        t *= BARRIER_MULT

    # polish the last center so the stationarity residual is meaningful
    if factored:
        x, glast, steps = _center_factored(x, sub, t, K, U, tol=POLISH_TOL)
    else:
        x, glast, steps = _center_dense(x, sub, t, grad, hess, tol=POLISH_TOL)
    steps_total += steps

    kkt = float(np.linalg.norm(glast)) / (t * max(1.0, float(np.linalg.norm(sub.gobj))))
    return SolveInfo(x=x, obj=float(sub.gobj @ x), gap=gap, kkt_res=kkt,
                     steps=steps_total, status=status)
