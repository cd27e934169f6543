"""Inner-loop kernels with a numba path and a pure-numpy path.

Each kernel exists twice: ``*_loop`` is written as explicit loops and is
compiled with numba when available; ``*_numpy`` is the vectorized (or plain
Python) reference. The public names bind to the compiled loop when numba is
active and to the numpy version otherwise, so results never depend on
whether numba is installed beyond floating-point summation order.
"""

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

__all__ = [
    "soft_threshold",
    "clip_box",
    "theta_beta_sequence",
    "mode_recurrence",
    "local_minima",
    "BACKEND",
]


@njit
def soft_threshold_loop(v, alpha):
    out = np.empty_like(v)
    for i in range(v.shape[0]):
        vi = v[i]
        if vi > alpha:
            out[i] = vi - alpha
        elif vi < -alpha:
            out[i] = vi + alpha
        else:
            out[i] = 0.0
    return out


def soft_threshold_numpy(v, alpha):
    return np.sign(v) * np.maximum(np.abs(v) - alpha, 0.0)


@njit
def clip_box_loop(z, lo, hi):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        zi = z[i]
        if zi < lo[i]:
            out[i] = lo[i]
        elif zi > hi[i]:
            out[i] = hi[i]
        else:
            out[i] = zi
    return out


def clip_box_numpy(z, lo, hi):
    return np.minimum(np.maximum(z, lo), hi)


@njit
def _theta_next_scalar(theta, q):
    b = theta * theta - q
    disc = math.sqrt(b * b + 4.0 * theta * theta)
    if b > 0.0:
        # conjugate form: avoids -b + sqrt(b^2 + ...) cancellation
        return 2.0 * theta * theta / (b + disc)
    return 0.5 * (-b + disc)


@njit
def theta_beta_sequence_loop(q, n_steps):
    thetas = np.empty(n_steps + 1)
    betas = np.empty(n_steps + 1)
    thetas[0] = 1.0
    betas[0] = 0.0
    for k in range(n_steps):
        th = thetas[k]
        nxt = _theta_next_scalar(th, q)
        thetas[k + 1] = nxt
        betas[k + 1] = th * (1.0 - th) / (th * th + nxt)
    return thetas, betas


def theta_beta_sequence_numpy(q, n_steps):
    thetas = np.empty(n_steps + 1)
    betas = np.empty(n_steps + 1)
    thetas[0] = 1.0
    betas[0] = 0.0
    th = 1.0
    for k in range(n_steps):
        b = th * th - q
        disc = math.sqrt(b * b + 4.0 * th * th)
        nxt = 2.0 * th * th / (b + disc) if b > 0.0 else 0.5 * (-b + disc)
        thetas[k + 1] = nxt
        betas[k + 1] = th * (1.0 - th) / (th * th + nxt)
        th = nxt
    return thetas, betas


@njit
def mode_recurrence_loop(w0, w1, a1, a0, k_max):
    n = w0.shape[0]
    out = np.empty((k_max + 1, n))
    for i in range(n):
        out[0, i] = w0[i]
        if k_max >= 1:
            out[1, i] = w1[i]
        for k in range(2, k_max + 1):
            out[k, i] = a1[i] * out[k - 1, i] - a0[i] * out[k - 2, i]
    return out


def mode_recurrence_numpy(w0, w1, a1, a0, k_max):
    out = np.empty((k_max + 1, w0.shape[0]))
    out[0] = w0
    if k_max >= 1:
        out[1] = w1
    for k in range(2, k_max + 1):
        out[k] = a1 * out[k - 1] - a0 * out[k - 2]
    return out


@njit
def local_minima_loop(f):
    n = f.shape[0]
    idx = np.empty(max(n - 2, 0), dtype=np.int64)
    count = 0
    for i in range(1, n - 1):
        if f[i] < f[i - 1] and f[i] <= f[i + 1]:
            idx[count] = i
            count += 1
    return idx[:count]


def local_minima_numpy(f):
    if f.shape[0] < 3:
        return np.empty(0, dtype=np.int64)
    mid = f[1:-1]
    mask = (mid < f[:-2]) & (mid <= f[2:])
    return (np.nonzero(mask)[0] + 1).astype(np.int64)


if HAVE_NUMBA:
    BACKEND = "numba"
    _soft = soft_threshold_loop
    _clip = clip_box_loop
    _theta_beta = theta_beta_sequence_loop
    _modes = mode_recurrence_loop
    _minima = local_minima_loop
else:  # pragma: no cover
    BACKEND = "numpy"
    _soft = soft_threshold_numpy
    _clip = clip_box_numpy
    _theta_beta = theta_beta_sequence_numpy
    _modes = mode_recurrence_numpy
    _minima = local_minima_numpy


def soft_threshold(v, alpha):
    return _soft(np.ascontiguousarray(v, dtype=np.float64), float(alpha))


def clip_box(z, lo, hi):
    return _clip(
        np.ascontiguousarray(z, dtype=np.float64),
        np.ascontiguousarray(lo, dtype=np.float64),
        np.ascontiguousarray(hi, dtype=np.float64),
    )


def theta_beta_sequence(q, n_steps):
    """Return ``(thetas, betas)`` of length ``n_steps + 1`` from a fresh start."""
    return _theta_beta(float(q), int(n_steps))


def mode_recurrence(w0, w1, a1, a0, k_max):
    """Iterate ``w[k+2] = a1 * w[k+1] - a0 * w[k]`` for every mode column."""
    return _modes(
        np.ascontiguousarray(w0, dtype=np.float64),
        np.ascontiguousarray(w1, dtype=np.float64),
        np.ascontiguousarray(a1, dtype=np.float64),
        np.ascontiguousarray(a0, dtype=np.float64),
        int(k_max),
    )


def local_minima(f):
    """Indices ``i`` with ``f[i-1] > f[i] <= f[i+1]`` (3-point window)."""
    return _minima(np.ascontiguousarray(f, dtype=np.float64))
