"""Linear-recurrence view of momentum methods on quadratics.

With step ``1/L`` and a constant momentum ``beta`` every eigenmode of a
quadratic evolves independently as

    w[k+2] = (1 + beta)(1 - lam/L) w[k+1] - beta (1 - lam/L) w[k],
    w[1] = (1 - lam/L) w[0],

so the iterates are governed by the roots of
``r**2 - (1 + beta)(1 - lam/L) r + beta (1 - lam/L)``.
"""

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import InputError
from .momentum import beta_star
from .solvers import Trace

__all__ = [
    "OVER_DAMPED",
    "CRITICALLY_DAMPED",
    "UNDER_DAMPED",
    "DomainError",
    "SpectralModel",
    "mode_beta_star",
    "char_roots",
    "classify_regime",
    "mode_frequency",
    "closed_form_mode",
    "recurrence_mode",
    "simulate_constant_beta",
    "predicted_adaptive_interval",
    "predicted_period",
    "predicted_f_trace",
    "predicted_gradient_signal",
    "steps_to_exceed_beta_star",
    "regime_sweep",
    "export_regime_csv",
]

OVER_DAMPED = "over_damped"
CRITICALLY_DAMPED = "critically_damped"
UNDER_DAMPED = "under_damped"

REGIME_TOL = 1e-12


class DomainError(InputError):
    pass


def _check(beta, lam_ratio, beta_max=1.0):
    if not 0.0 <= beta <= beta_max:
        raise InputError(f"beta out of range: {beta}")
    if not 0.0 < lam_ratio <= 1.0:
        raise InputError(f"lam_ratio must lie in (0, 1], got {lam_ratio}")


def mode_beta_star(lam_ratio):
    """Momentum at which the mode with ``lam/L = lam_ratio`` is critically damped."""
    s = math.sqrt(lam_ratio)
    return (1.0 - s) / (1.0 + s)


def char_roots(beta, lam_ratio):
    """Both roots of the characteristic polynomial, as complex numbers.

    ``r1`` takes the ``+`` branch of the square root.
    """
    _check(beta, lam_ratio)
    a1 = (1.0 + beta) * (1.0 - lam_ratio)
    a0 = beta * (1.0 - lam_ratio)
    sq = cmath.sqrt(a1 * a1 - 4.0 * a0)
    return complex(0.5 * (a1 + sq)), complex(0.5 * (a1 - sq))


def classify_regime(beta, lam_ratio, tol=REGIME_TOL):
    _check(beta, lam_ratio)
    bs = mode_beta_star(lam_ratio)
    # lam = L collapses both roots to zero: a double root
    if lam_ratio == 1.0 or abs(beta - bs) <= tol:
        return CRITICALLY_DAMPED
    return UNDER_DAMPED if beta > bs else OVER_DAMPED


def mode_frequency(beta, lam_ratio):
    """Oscillation frequency ``psi`` (radians per iteration) of an under-damped mode."""
    _check(beta, lam_ratio)
    a = 1.0 - lam_ratio
    if beta == 0.0 or a == 0.0:
        raise DomainError("mode has real roots; no oscillation")
    arg = a * (1.0 + beta) / (2.0 * math.sqrt(beta * a))
    if arg >= 1.0:
        raise DomainError("mode has real roots; no oscillation")
    return math.acos(arg)


def closed_form_mode(w0, beta, lam_ratio, k):
    """Evaluate the exact solution of the mode recurrence at iteration(s) ``k``.

    The two free constants are fitted to ``w[0] = w0`` and
    ``w[1] = (1 - lam_ratio) w0``; no small-phase approximation is made.
    """
    _check(beta, lam_ratio)
    k = np.asarray(k)
    kf = k.astype(np.float64)
    a = 1.0 - lam_ratio
    w1 = a * w0
    if a == 0.0:
        return np.where(k == 0, float(w0), 0.0)
    regime = classify_regime(beta, lam_ratio)
    if regime == UNDER_DAMPED:
        rho = math.sqrt(beta * a)
        psi = math.acos(a * (1.0 + beta) / (2.0 * rho))
        # w_k = rho^k (P cos k psi + R sin k psi)
        P = float(w0)
        R = (w1 / rho - P * math.cos(psi)) / math.sin(psi)
        return rho ** kf * (P * np.cos(kf * psi) + R * np.sin(kf * psi))
    if regime == CRITICALLY_DAMPED:
        r = 0.5 * (1.0 + beta) * a
        c1 = float(w0)
        c2 = w1 / r - c1
        return (c1 + c2 * kf) * r ** kf
    r1, r2 = (z.real for z in char_roots(beta, lam_ratio))
    c1 = (w1 - r2 * w0) / (r1 - r2)
    c2 = w0 - c1
    return c1 * r1 ** kf + c2 * np.power(r2, kf)


def recurrence_mode(w0, beta, lam_ratio, k_max):
    """Iterate the mode recurrence directly; returns ``w[0..k_max]``.

    ``w0`` may be an array of modes sharing ``beta``; ``lam_ratio`` may be an
    array of matching shape.
    """
    w0 = np.atleast_1d(np.asarray(w0, dtype=np.float64))
    lam = np.broadcast_to(np.asarray(lam_ratio, dtype=np.float64), w0.shape)
    a = 1.0 - lam
    out = _kernels.mode_recurrence(w0, a * w0, (1.0 + beta) * a, beta * a, k_max)
    return out[:, 0] if out.shape[1] == 1 and np.ndim(lam_ratio) == 0 else out


def simulate_constant_beta(quadratic, beta, x0, k_max):
    """Run ``x+ = y - grad f(y)/L``, ``y+ = x+ + beta (x+ - x)`` from ``y0 = x0``.

    Iterates are stored in ``trace.iterates``.
    """
    if not 0.0 <= beta < 1.0:
        raise InputError("beta must lie in [0, 1)")
    A, q, L = quadratic.A, quadratic.q, quadratic.L
    x = np.array(x0, dtype=np.float64)
    y = x.copy()
    trace = Trace(f"constant_beta({beta:.6g})")
    trace.append(0, quadratic.value(x), beta, 1.0 / L, False)
    iterates = [x.copy()]
    for k in range(k_max):
        x_new = y - (A @ y + q) / L
        y = x_new + beta * (x_new - x)
        x = x_new
        fx = quadratic.value(x)
        trace.append(k + 1, fx, beta, 1.0 / L, False)
        iterates.append(x.copy())
    trace.iterates = iterates
    trace.final_x = x
    return trace


def predicted_adaptive_interval(mu, L):
    """``(3/2 + pi/2) sqrt(L/mu)``: ramp-up past ``beta*`` plus a quarter period."""
    if not 0.0 < mu <= L:
        raise InputError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    return 0.5 * (math.pi + 3.0) * math.sqrt(L / mu)


def predicted_period(mu, L):
    """Spacing between minima of ``cos(k sqrt(mu/L))**2``."""
    if not 0.0 < mu <= L:
        raise InputError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    return math.pi * math.sqrt(L / mu)


def predicted_f_trace(quadratic, x0, beta, k):
    """Single slow-mode approximation of ``f(x_k) - f*`` under momentum ``beta``.

    Only the phase is meant to be accurate; the amplitude ignores the
    transient and the other modes.
    """
    mu, L = quadratic.mu, quadratic.L
    w_mu = float(quadratic.modes(x0)[0])
    kf = np.asarray(k, dtype=np.float64)
    env = (beta * (1.0 - mu / L)) ** kf
    return 0.5 * mu * w_mu * w_mu * env * np.cos(kf * math.sqrt(mu / L)) ** 2


def predicted_gradient_signal(quadratic, x0, beta, k):
    """Approximate ``grad f(y_k)'(x_{k+1} - x_k)`` for the slowest mode.

    Positive values mean the gradient test would fire.
    """
    mu, L = quadratic.mu, quadratic.L
    w_mu = float(quadratic.modes(x0)[0])
    kf = np.asarray(k, dtype=np.float64)
    s = math.sqrt(mu / L)
    env = (beta * (1.0 - mu / L)) ** kf
    return -0.5 * mu * s * w_mu * w_mu * env * np.sin(2.0 * kf * s)


def steps_to_exceed_beta_star(mu, L):
    """First ``k`` at which the ``q=0`` momentum ``beta_k`` exceeds ``beta*(mu, L)``."""
    target = beta_star(mu, L)
    n = 64
    while True:
        _, betas = _kernels.theta_beta_sequence(0.0, n)
        hit = np.nonzero(betas > target)[0]
        if hit.size:
            return int(hit[0])
        n *= 2


@dataclass(frozen=True)
class SpectralModel:
    """Eigenvalues of a quadratic with per-mode critical momenta."""

    eigvals: np.ndarray

    @classmethod
    def from_quadratic(cls, quadratic):
        return cls(np.sort(np.asarray(quadratic.eigvals, dtype=np.float64)))

    @property
    def L(self):
        return float(self.eigvals[-1])

    @property
    def mu(self):
        return float(self.eigvals[0])

    @property
    def lam_ratios(self):
        return self.eigvals / self.L

    @property
    def beta_star_modes(self):
        s = np.sqrt(self.lam_ratios)
        return (1.0 - s) / (1.0 + s)

    def regimes(self, beta):
        return [classify_regime(beta, float(r)) for r in self.lam_ratios]

    def frequencies(self, beta):
        """Per-mode ``psi``; NaN where the mode is not under-damped."""
        out = np.full(self.eigvals.shape, np.nan)
        for i, r in enumerate(self.lam_ratios):
            try:
                out[i] = mode_frequency(beta, float(r))
            except DomainError:
                pass
        return out


REGIME_COLUMNS = ("beta", "lam_ratio", "regime", "root1_re", "root1_im", "root2_re", "root2_im", "psi")


def regime_sweep(betas, lam_ratios):
    rows = []
    for b in betas:
        for r in lam_ratios:
            r1, r2 = char_roots(b, r)
            regime = classify_regime(b, r)
            psi = float("nan")
            if regime == UNDER_DAMPED:
                try:
                    psi = mode_frequency(b, r)
                except DomainError:
                    psi = 0.0  # rounding put the discriminant at zero
            rows.append((float(b), float(r), regime, r1.real, r1.imag, r2.real, r2.imag, psi))
    return rows


def export_regime_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REGIME_COLUMNS)
        for row in rows:
            writer.writerow([row[0], row[1], row[2]] + [format(v, ".17g") for v in row[3:]])
