"""Pure NumPy implementations of the hot numeric kernels.

Mirrors `_ext.pyx` exactly; tests assert both backends agree to float
precision. Signatures are kept flat (real/imag parts, preallocated outputs)
so the compiled and fallback versions are drop-in replacements.
"""

import math

import numpy as np


def rate_logsum(u_re, u_im, s_re, s_im, c_re, c_im):
    """sum_t ln(1 + |u + c_t * s|^2) for scalars u, s and sample array c."""
    xr = u_re + c_re * s_re - c_im * s_im
    xi = u_im + c_re * s_im + c_im * s_re
    return float(np.log1p(xr * xr + xi * xi).sum())


def barrier_fgh(x, gobj, A, e, klog, q, r0, eps_dom, ball_kind, r2, t,
                rate_active, mode, grad, hess):
    """Log-barrier value (mode 0) or value+gradient+Hessian (mode 1).

    Objective is minimize t*(-gobj.x) + Phi(x) where Phi collects:
      - ball barrier: kind 0 -> -ln(r2 - |x|^2); kind 1 -> per-coordinate-pair
        modulus barriers -ln(r2 - x_i^2 - x_{i+n/2}^2)
      - when rate_active: domain barriers -ln(s_t - eps_dom) with s = e + A x,
        and the rate barrier -ln(Rv), Rv = klog*sum(ln s_t) - q|x|^2 - r0.

    Returns (psi, ok); ok = 0 flags an infeasible point (psi = +inf), in which
    case grad/hess are untouched.
    """
    n = x.shape[0]
    psi = -t * float(gobj @ x)
    xx = float(x @ x)

    if ball_kind == 0:
        s0 = r2 - xx
        if s0 <= 0.0:
            return np.inf, 0
        psi -= math.log(s0)
    else:
        h = n // 2
        sb = r2 - x[:h] * x[:h] - x[h:] * x[h:]
        if np.any(sb <= 0.0):
            return np.inf, 0
        psi -= float(np.log(sb).sum())

    if rate_active:
        s = e + A @ x
        sd = s - eps_dom
        if np.any(sd <= 0.0):
            return np.inf, 0
        rv = klog * float(np.log(s).sum()) - q * xx - r0
        if rv <= 0.0:
            return np.inf, 0
        psi -= float(np.log(sd).sum()) + math.log(rv)

    if mode == 0:
        return psi, 1

    g = -t * gobj
    H = np.zeros((n, n))

    if ball_kind == 0:
        g = g + (2.0 / s0) * x
        H[np.diag_indices(n)] += 2.0 / s0
        H += (4.0 / (s0 * s0)) * np.outer(x, x)
    else:
        c1 = 2.0 / sb
        c2 = 4.0 / (sb * sb)
        g = g + np.concatenate([c1 * x[:h], c1 * x[h:]])
        idx = np.arange(h)
        H[idx, idx] += c1 + c2 * x[:h] * x[:h]
        H[idx + h, idx + h] += c1 + c2 * x[h:] * x[h:]
        cross = c2 * x[:h] * x[h:]
        H[idx, idx + h] += cross
        H[idx + h, idx] += cross

    if rate_active:
        inv_sd = 1.0 / sd
        inv_s = 1.0 / s
        g = g - A.T @ inv_sd
        grad_rv = klog * (A.T @ inv_s) - (2.0 * q) * x
        g = g - grad_rv / rv
        wrow = inv_sd * inv_sd + (klog * inv_s * inv_s) / rv
        H += (A * wrow[:, None]).T @ A
        H += np.outer(grad_rv, grad_rv) / (rv * rv)
        if q != 0.0:
            H[np.diag_indices(n)] += 2.0 * q / rv

    grad[:] = g
    hess[:, :] = H
    return psi, 1
