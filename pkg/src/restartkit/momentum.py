"""Momentum sequences for the accelerated schemes."""

import math
from dataclasses import dataclass

from .exceptions import InputError

__all__ = [
    "theta_next",
    "beta_from_theta",
    "beta_star",
    "fista_theta_next",
    "fista_beta",
    "MomentumState",
    "FistaMomentum",
]


def theta_next(theta_k, q):
    """Positive root of ``t**2 = (1 - t) * theta_k**2 + q * t``.

    Parameters
    ----------
    theta_k : float
        Current value, in ``(0, 1]``.
    q : float
        Inverse condition estimate ``mu/L`` in ``[0, 1]``. ``q=1`` keeps
        ``theta`` at 1 (plain gradient descent), ``q=0`` is the usual
        parameter-free sequence.
    """
    if not 0.0 < theta_k <= 1.0:
        raise InputError(f"theta must lie in (0, 1], got {theta_k}")
    if not 0.0 <= q <= 1.0:
        raise InputError(f"q must lie in [0, 1], got {q}")
    th2 = theta_k * theta_k
    b = th2 - q
    disc = math.sqrt(b * b + 4.0 * th2)
    if b > 0.0:
        return 2.0 * th2 / (b + disc)
    return 0.5 * (-b + disc)


def beta_from_theta(theta_k, theta_next):
    if not (0.0 < theta_k <= 1.0 and 0.0 < theta_next <= 1.0):
        raise InputError("theta values must lie in (0, 1]")
    return theta_k * (1.0 - theta_k) / (theta_k * theta_k + theta_next)


def beta_star(mu, L):
    """Constant momentum ``(1 - sqrt(mu/L)) / (1 + sqrt(mu/L))``."""
    if not 0.0 < mu <= L:
        raise InputError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    r = math.sqrt(mu / L)
    return (1.0 - r) / (1.0 + r)


def fista_theta_next(theta):
    if not theta >= 1.0:
        raise InputError(f"FISTA theta must be >= 1, got {theta}")
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))


def fista_beta(theta_k, theta_next):
    return (theta_k - 1.0) / theta_next


@dataclass
class MomentumState:
    """Running ``theta``/``beta`` pair for the generic accelerated scheme."""

    q: float = 0.0
    theta: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise InputError(f"q must lie in [0, 1], got {self.q}")

    def advance(self):
        """Move to the next ``theta`` and return the new ``beta``."""
        nxt = theta_next(self.theta, self.q)
        self.beta = beta_from_theta(self.theta, nxt)
        self.theta = nxt
        return self.beta

    def reset(self):
        self.theta = 1.0
        self.beta = 0.0


@dataclass
class FistaMomentum:
    theta: float = 1.0
    beta: float = 0.0

    def advance(self):
        nxt = fista_theta_next(self.theta)
        self.beta = fista_beta(self.theta, nxt)
        self.theta = nxt
        return self.beta

    def reset(self):
        self.theta = 1.0
        self.beta = 0.0
