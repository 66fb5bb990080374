"""Special functions, small linear-algebra kernels, and seeded sampling.

Everything here is dependency-light on purpose: the Lambert-W and Laguerre
evaluations sit inside optimization hot loops, so they avoid quadrature and
external special-function libraries.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "DomainError",
    "NotPSDError",
    "RngStream",
    "lambert_w0",
    "laguerre_half",
    "top_eigpair_rank2",
    "matrix_sqrt_psd",
    "sample_cn",
]

_INV_E = math.exp(-1.0)


class DomainError(ValueError):
    """Argument outside the mathematical domain of a special function."""


class NotPSDError(ValueError):
    """Matrix expected to be positive semidefinite is not."""


# ---------------------------------------------------------------------------
# Lambert W, principal branch


def _w0_initial_guess(x: float) -> float:
    if x < -0.25:
        # branch-point series around x = -1/e
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        return -1.0 + p - p * p / 3.0 + 11.0 * p**3 / 72.0
    if x < 2.0:
        # rational starter, accurate enough for Halley to take over
        return x * (1.0 - x * (1.0 - 1.5 * x) / (1.0 + x + x * x))
    lx = math.log(x)
    llx = math.log(lx)
    return lx - llx + llx / lx


def lambert_w0(x: float) -> float:
    """Principal branch W(x) solving w*exp(w) = x for x >= -1/e.

    Halley iteration from a branch-point / log-based starter; the residual
    |w e^w - x| is driven below 1e-12 * max(1, |x|).
    """
    x = float(x)
    if not np.isfinite(x):
        raise DomainError(f"lambert_w0 needs a finite argument, got {x}")
    if x < -_INV_E:
        if x > -_INV_E - 1e-12:  # float noise at the branch point
            return -1.0
        raise DomainError(f"lambert_w0 domain is [-1/e, inf), got {x}")
    if x == 0.0:
        return 0.0
    w = _w0_initial_guess(x)
    if w <= -1.0:
        w = -1.0 + 1e-12
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        wp1 = w + 1.0
        # Halley step; the denominator keeps its sign for w > -1
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


# ---------------------------------------------------------------------------
# Laguerre function of order 1/2 (via scaled modified Bessel functions)


def _bessel_i_scaled(nu: int, t: float) -> float:
    """exp(-t) * I_nu(t) for t >= 0, nu in {0, 1}."""
    if t < 0.0:
        raise DomainError("scaled Bessel argument must be >= 0")
    if t == 0.0:
        return 1.0 if nu == 0 else 0.0
    if t < 16.0:
        # power series times exp(-t); converges fast for t < 16
        half = 0.5 * t
        term = half**nu / math.gamma(nu + 1.0)
        total = term
        k = 1
        while True:
            term *= half * half / (k * (k + nu))
            total += term
            if term < 1e-18 * total or k > 200:
                break
            k += 1
        return total * math.exp(-t)
    # large-argument asymptotic expansion of exp(-t) I_nu(t)
    mu = 4.0 * nu * nu
    s = 1.0
    term = 1.0
    for k in range(1, 12):
        term *= -(mu - (2.0 * k - 1.0) ** 2) / (8.0 * t * k)
        s += term
        if abs(term) < 1e-17 * abs(s):
            break
    return s / math.sqrt(2.0 * math.pi * t)


def laguerre_half(x: float) -> float:
    """L_{1/2}(x) for x <= 0, the half-order Laguerre function.

    Uses L_{1/2}(x) = e^{x/2} [(1-x) I0(-x/2) - x I1(-x/2)], which needs only
    the scaled Bessel terms e^{-t} I_nu(t) at t = -x/2 >= 0.
    """
    x = float(x)
    if x > 0.0:
        raise DomainError("laguerre_half is implemented for x <= 0 only")
    t = -0.5 * x
    return (1.0 - x) * _bessel_i_scaled(0, t) - x * _bessel_i_scaled(1, t)


# ---------------------------------------------------------------------------
# rank-2 Hermitian eigenpair


def top_eigpair_rank2(a: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray]:
    """Top eigenpair of a a^H + b b^H via the 2x2 Gram system on span{a, b}.

    Returns (lambda_max, v) with v unit-norm. Degenerate inputs fall back to
    the obvious rank-1 / zero answers; a = b = 0 returns (0, e_1).
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError("a and b must have the same length")
    na2 = float(np.real(np.vdot(a, a)))
    nb2 = float(np.real(np.vdot(b, b)))
    if na2 == 0.0 and nb2 == 0.0:
        e1 = np.zeros(a.shape[0], dtype=complex)
        e1[0] = 1.0
        return 0.0, e1
    ab = complex(np.vdot(a, b))
    tr = na2 + nb2
    det = max(na2 * nb2 - abs(ab) ** 2, 0.0)
    disc = math.sqrt(max(tr * tr - 4.0 * det, 0.0))
    lam = 0.5 * (tr + disc)
    # eigenvector of the Gram matrix [[na2, ab], [ab*, nb2]] for lam
    c1, c2 = ab, lam - na2
    alt1, alt2 = lam - nb2, np.conj(ab)
    if abs(alt1) ** 2 + abs(alt2) ** 2 > abs(c1) ** 2 + abs(c2) ** 2:
        c1, c2 = alt1, alt2
    v = c1 * a + c2 * b
    nv = float(np.linalg.norm(v))
    if nv < 1e-14 * math.sqrt(max(na2, nb2)):
        # colinear cancellation: the dominant direction is the larger input
        v = a if na2 >= nb2 else b
        nv = float(np.linalg.norm(v))
    return lam, v / nv


def matrix_sqrt_psd(R: np.ndarray) -> np.ndarray:
    """Hermitian square root S of a PSD matrix R, with S S^H = R.

    Eigenvalues below -1e-10 (relative) raise NotPSDError; small negative
    noise is clipped to zero.
    """
    R = np.asarray(R)
    vals, vecs = np.linalg.eigh(R)
    scale = max(float(vals[-1]), 1.0)
    if float(vals[0]) < -1e-10 * scale:
        raise NotPSDError(f"smallest eigenvalue {vals[0]:.3e} below tolerance")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


# ---------------------------------------------------------------------------
# seeded sampling


class RngStream:
    """Deterministic random stream keyed by (seed, stream id).

    Two instances built with the same ids produce bit-identical sequences;
    `child(k)` derives an independent stream for sub-tasks (trials, restarts).
    Each instance is owned by exactly one consumer: draws advance its state.
    """

    def __init__(self, seed: int, stream: int = 0, _subkey: tuple = ()):
        self.seed = int(seed)
        self.stream = int(stream)
        self._subkey = tuple(int(k) for k in _subkey)
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(
                entropy=self.seed, spawn_key=(self.stream, *self._subkey)
            )
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def child(self, k: int) -> "RngStream":
        return RngStream(self.seed, self.stream, self._subkey + (int(k),))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream}{self._subkey or ''})"


def sample_cn(mean, cov_factor, rng: RngStream) -> np.ndarray:
    """mean + cov_factor @ u with u i.i.d. standard circularly-symmetric CN."""
    mean = np.asarray(mean, dtype=complex)
    cov_factor = np.asarray(cov_factor, dtype=complex)
    n = cov_factor.shape[1]
    g = rng.generator
    u = (g.standard_normal(n) + 1j * g.standard_normal(n)) / math.sqrt(2.0)
    return mean + cov_factor @ u


def standard_cn(rng: RngStream, *shape: int) -> np.ndarray:
    """i.i.d. CN(0, 1) array of the given shape (unit variance per entry)."""
    g = rng.generator
    return (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / math.sqrt(2.0)
