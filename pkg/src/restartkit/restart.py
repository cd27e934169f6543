"""Restart policies for accelerated schemes."""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError

__all__ = [
    "RestartPolicy",
    "parse_policy",
    "fixed_interval_bound",
    "should_restart_function",
    "should_restart_gradient",
    "should_restart_generalized",
]

KINDS = ("none", "fixed", "function", "gradient")


def fixed_interval_bound(mu, L):
    """Upper bound ``e * sqrt(8 L / mu)`` on the best fixed restart interval."""
    if not mu > 0:
        raise InputError(f"mu must be positive, got {mu}")
    if mu > L:
        raise InputError(f"need mu <= L, got mu={mu}, L={L}")
    return math.e * math.sqrt(8.0 * L / mu)


def should_restart_function(f_curr, f_prev):
    if math.isnan(f_curr) or math.isnan(f_prev):
        raise InputError("function values must not be NaN")
    return f_curr > f_prev


def _same_shape(*arrays):
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    if any(a.shape != arrays[0].shape for a in arrays[1:]):
        raise InputError("vectors must have equal dimensions")
    return arrays


def should_restart_gradient(grad_y_prev, x_curr, x_prev):
    g, xc, xp = _same_shape(grad_y_prev, x_curr, x_prev)
    return float(g @ (xc - xp)) > 0.0


def should_restart_generalized(y_prev, x_curr, x_prev):
    """Generalized-gradient test ``(y - x+)'(x+ - x) > 0`` for prox/projected steps."""
    y, xc, xp = _same_shape(y_prev, x_curr, x_prev)
    return float((y - xc) @ (xc - xp)) > 0.0


@dataclass
class RestartPolicy:
    """Per-run restart state.

    ``kind`` is one of ``none``, ``fixed``, ``function`` or ``gradient``.
    Adaptive kinds never fire within ``min_interval`` steps of the last
    restart; ``fixed`` fires exactly every ``interval`` steps.
    """

    kind: str = "none"
    interval: int = None
    min_interval: int = 5
    steps_since_restart: int = 0
    total_restarts: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown restart kind {self.kind!r}")
        if self.kind == "fixed":
            if self.interval is None or int(self.interval) < 1:
                raise InputError("fixed restart needs an interval >= 1")
            self.interval = int(self.interval)
        if int(self.min_interval) < 1:
            raise InputError("min_interval must be >= 1")

    @property
    def label(self):
        if self.kind == "fixed":
            return f"fixed:{self.interval}"
        return {"none": "none", "function": "func", "gradient": "grad"}[self.kind]

    def fresh(self):
        """A copy with counters zeroed, for a new run."""
        return RestartPolicy(self.kind, self.interval, self.min_interval)

    def decide(self, f_curr=None, f_prev=None, direction=None, step=None):
        """Advance one iteration and report whether to restart now.

        ``direction`` is the gradient (or generalized gradient) at the point
        the step was taken from, ``step`` is ``x_{k+1} - x_k``.
        """
        self.steps_since_restart += 1
        if self.kind == "none":
            fire = False
        elif self.kind == "fixed":
            fire = self.steps_since_restart >= self.interval
        elif self.steps_since_restart < self.min_interval:
            fire = False
        elif self.kind == "function":
            fire = should_restart_function(f_curr, f_prev)
        else:
            fire = float(direction @ step) > 0.0
        if fire:
            self.steps_since_restart = 0
            self.total_restarts += 1
        return fire


def parse_policy(text, min_interval=5):
    """Parse ``none``, ``fixed:<k>``, ``func`` or ``grad``."""
    text = text.strip().lower()
    if text == "none":
        return RestartPolicy("none", min_interval=min_interval)
    if text in ("func", "function"):
        return RestartPolicy("function", min_interval=min_interval)
    if text in ("grad", "gradient"):
        return RestartPolicy("gradient", min_interval=min_interval)
    if text.startswith("fixed:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad fixed interval in {text!r}") from None
        return RestartPolicy("fixed", interval=k, min_interval=min_interval)
    raise InputError(f"unknown restart policy {text!r}")
