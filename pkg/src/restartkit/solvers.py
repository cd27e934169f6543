"""Gradient, accelerated, proximal and projected solvers with restarts.

Every solver returns a :class:`Trace` with one record per iterate, starting
with ``x0`` at ``k=0``. Restart decisions are taken after ``x_{k+1}`` is
formed and before the extrapolation; on restart the extrapolation is skipped
(``y = x_{k+1}``) and the momentum sequence starts over.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, NumericError
from .momentum import FistaMomentum, MomentumState, beta_star
from .oracles import BoxQP, LassoProblem, Quadratic
from .restart import RestartPolicy

__all__ = [
    "SolverConfig",
    "Trace",
    "backtracking_step",
    "gradient_descent",
    "accelerated_scheme1",
    "accelerated_scheme2",
    "ista",
    "fista",
    "projected_gradient",
    "accel_projected_gradient",
]

_EPS = np.finfo(np.float64).eps


@dataclass
class SolverConfig:
    """Solver settings.

    ``step_size`` is a positive float or the string ``"backtracking"``.
    ``tol`` of zero disables the residual test, so runs last ``max_iters``.
    """

    step_size: object = None
    q: float = 0.0
    max_iters: int = 1000
    tol: float = 0.0
    restart: RestartPolicy = field(default_factory=RestartPolicy)
    t_init: float = 1.0
    record_iterates: bool = False

    def __post_init__(self):
        if isinstance(self.step_size, str):
            if self.step_size != "backtracking":
                raise InputError(f"unknown step rule {self.step_size!r}")
        elif self.step_size is not None and not self.step_size > 0:
            raise InputError("step_size must be positive")
        if not 0.0 <= self.q <= 1.0:
            raise InputError("q must lie in [0, 1]")
        if self.max_iters < 0:
            raise InputError("max_iters must be nonnegative")

    @property
    def backtracking(self):
        return self.step_size == "backtracking"


class Trace:
    """Per-iteration record of a solver run.

    Columns are stored as lists while running and exposed as arrays through
    the properties. ``f_star_ref`` is attached after the run.
    """

    def __init__(self, label=""):
        self.label = label
        self._k = []
        self._f = []
        self._beta = []
        self._step = []
        self._restarted = []
        self.iterates = None
        self.final_x = None
        self.f_star_ref = None
        self.info = {}

    def append(self, k, f, beta, step, restarted):
        self._k.append(k)
        self._f.append(f)
        self._beta.append(beta)
        self._step.append(step)
        self._restarted.append(bool(restarted))

    def __len__(self):
        return len(self._k)

    @property
    def k(self):
        return np.asarray(self._k, dtype=np.int64)

    @property
    def f(self):
        return np.asarray(self._f, dtype=np.float64)

    @property
    def beta(self):
        return np.asarray(self._beta, dtype=np.float64)

    @property
    def step(self):
        return np.asarray(self._step, dtype=np.float64)

    @property
    def restarted(self):
        return np.asarray(self._restarted, dtype=bool)

    @property
    def records(self):
        return list(zip(self._k, self._f, self._beta, self._step, self._restarted))

    @property
    def restart_iterations(self):
        return self.k[self.restarted]

    def f_rel(self, f_star=None):
        """``(f - f*) / max(|f*|, 1e-300)``."""
        fs = self.f_star_ref if f_star is None else f_star
        if fs is None:
            raise InputError("no reference optimum attached to the trace")
        return (self.f - fs) / max(abs(fs), 1e-300)

    def iterations_to(self, tol, f_star=None):
        """First ``k`` with relative suboptimality ``<= tol``, else ``None``."""
        hit = np.nonzero(self.f_rel(f_star) <= tol)[0]
        return int(self.k[hit[0]]) if hit.size else None


def _check_x0(obj, x0):
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1 or x0.shape[0] != obj.n:
        raise InputError(f"x0 must be a vector of length {obj.n}")
    return x0.copy()


def _fixed_step(config, obj):
    if config.step_size is None:
        return 1.0 / obj.L
    if config.backtracking:
        raise InputError("this solver needs a fixed step size")
    return float(config.step_size)


def _diverged(trace, k, value):
    return NumericError(f"non-finite objective {value!r} at iteration {k}", trace)


def backtracking_step(obj, y, t_init, g=None, fy=None):
    """Halve ``t`` until the descent-lemma bound holds at ``x+ = y - t g``.

    Accepts when ``f(x+) <= f(y) + g'(x+ - y) + ||x+ - y||^2 / (2t)`` up to a
    few ulps of ``|f(y)|``. Returns ``(t, x+)``.
    """
    if not t_init > 0:
        raise InputError("t_init must be positive")
    if g is None:
        g = obj.grad(y)
    if fy is None:
        fy = obj.value(y)
    slack = 8.0 * _EPS * max(abs(fy), 1.0)
    t = float(t_init)
    while True:
        x_next = y - t * g
        d = x_next - y
        bound = fy + g @ d + (d @ d) / (2.0 * t)
        fx = obj.value(x_next)
        if fx <= bound + slack:
            return t, x_next
        t *= 0.5
        if t < 1e-300:
            raise NumericError("backtracking step size underflowed")


def _smooth_accelerated(obj, x0, config, beta_rule, label, callback=None):
    # beta_rule: object with advance()/reset(), or None for gradient descent
    x = _check_x0(obj, x0)
    y = x.copy()
    bt = config.backtracking
    t = config.t_init if bt else _fixed_step(config, obj)
    # quadratics keep A x and A y so each iteration costs one product
    linear = isinstance(obj, Quadratic) and not bt
    if linear:
        A, qv = obj.A, obj.q
        Ax = A @ x
        Ay = Ax
        fx = float(0.5 * (x @ Ax) + qv @ x)
    else:
        fx = obj.value(x)
    policy = config.restart.fresh()
    trace = Trace(label)
    if not math.isfinite(fx):
        raise _diverged(trace, 0, fx)
    trace.append(0, fx, 0.0, t, False)
    iterates = [x.copy()] if config.record_iterates else None
    for k in range(config.max_iters):
        g = Ay + qv if linear else obj.grad(y)
        if bt:
            t, x_new = backtracking_step(obj, y, t, g=g)
        else:
            x_new = y - t * g
        if linear:
            Ax_new = A @ x_new
            f_new = float(0.5 * (x_new @ Ax_new) + qv @ x_new)
        else:
            f_new = obj.value(x_new)
        if not math.isfinite(f_new):
            trace.final_x = x
            raise _diverged(trace, k + 1, f_new)
        dx = x_new - x
        if callback is not None:
            callback({"k": k, "y": y, "x": x, "x_next": x_new, "grad": g, "t": t})
        restart = policy.decide(f_curr=f_new, f_prev=fx, direction=g, step=dx)
        if beta_rule is None or restart:
            if restart and beta_rule is not None:
                beta_rule.reset()
            beta = 0.0
            y = x_new
            if linear:
                Ay = Ax_new
        else:
            beta = beta_rule.advance()
            y = x_new + beta * dx
            if linear:
                Ay = Ax_new + beta * (Ax_new - Ax)
        if linear:
            Ax = Ax_new
        x, fx = x_new, f_new
        trace.append(k + 1, fx, beta, t, restart)
        if iterates is not None:
            iterates.append(x.copy())
        if config.tol > 0 and float(np.linalg.norm(g)) <= config.tol:
            break
    trace.final_x = x
    trace.iterates = iterates
    trace.info["restarts"] = policy.total_restarts
    return trace


class _ConstantMomentum:
    def __init__(self, beta):
        self.beta = beta

    def advance(self):
        return self.beta

    def reset(self):
        pass


def gradient_descent(obj, x0, config=None, callback=None):
    """``x_{k+1} = x_k - t grad f(x_k)``."""
    config = config or SolverConfig()
    return _smooth_accelerated(obj, x0, config, None, "gd", callback)


def accelerated_scheme1(obj, x0, config=None, callback=None):
    """Accelerated gradient with the ``theta``/``q`` momentum sequence.

    ``q=0`` needs no knowledge of strong convexity; ``q=mu/L`` is optimal for
    strongly convex objectives and ``q=1`` reduces to gradient descent.
    """
    config = config or SolverConfig()
    label = f"scheme1(q={config.q:.6g},{config.restart.label})"
    return _smooth_accelerated(obj, x0, config, MomentumState(q=config.q), label, callback)


def accelerated_scheme2(obj, x0, mu, L, config=None, callback=None):
    """Constant-momentum scheme with ``beta* = (1 - sqrt(mu/L)) / (1 + sqrt(mu/L))``."""
    config = config or SolverConfig(step_size=1.0 / L)
    if config.step_size is None:
        config = SolverConfig(
            step_size=1.0 / L, q=config.q, max_iters=config.max_iters, tol=config.tol,
            restart=config.restart, record_iterates=config.record_iterates,
        )
    bs = beta_star(mu, L)
    return _smooth_accelerated(obj, x0, config, _ConstantMomentum(bs), "scheme2", callback)


def _fista_loop(lasso, x0, config, momentum, label, callback=None):
    if not isinstance(lasso, LassoProblem):
        raise InputError("ISTA/FISTA need a LassoProblem")
    t = _fixed_step(config, lasso)
    x = _check_x0(lasso, x0)
    A, b = lasso.A, lasso.b
    n_mult = n_tmult = 0
    Ax = A @ x
    n_mult += 1
    y, Ay = x.copy(), Ax.copy()
    policy = config.restart.fresh()
    trace = Trace(label)
    fx = lasso.value_from_product(Ax, x)
    trace.append(0, fx, 0.0, t, False)
    iterates = [x.copy()] if config.record_iterates else None
    for k in range(config.max_iters):
        g = A.T @ (Ay - b)
        n_tmult += 1
        x_new = lasso.prox(y - t * g, t)
        Ax_new = A @ x_new
        n_mult += 1
        f_new = lasso.value_from_product(Ax_new, x_new)
        if not math.isfinite(f_new):
            trace.final_x = x
            raise _diverged(trace, k + 1, f_new)
        dx = x_new - x
        gen = y - x_new
        if callback is not None:
            callback({"k": k, "y": y, "x": x, "x_next": x_new, "grad": g, "t": t})
        restart = policy.decide(f_curr=f_new, f_prev=fx, direction=gen, step=dx)
        if momentum is None:
            beta = 0.0
            y, Ay = x_new, Ax_new
        elif restart:
            momentum.reset()
            beta = 0.0
            y, Ay = x_new, Ax_new
        else:
            beta = momentum.advance()
            y = x_new + beta * dx
            # A y from cached products, no extra multiply
            Ay = Ax_new + beta * (Ax_new - Ax)
        x, Ax, fx = x_new, Ax_new, f_new
        trace.append(k + 1, fx, beta, t, restart)
        if iterates is not None:
            iterates.append(x.copy())
        if config.tol > 0 and float(np.linalg.norm(gen)) / t <= config.tol:
            break
    trace.final_x = x
    trace.iterates = iterates
    trace.info.update(restarts=policy.total_restarts, A_mult=n_mult, At_mult=n_tmult)
    return trace


def ista(lasso, x0, config=None, callback=None):
    """Iterative soft thresholding with constant step (default ``1/lambda_max(A'A)``)."""
    config = config or SolverConfig()
    return _fista_loop(lasso, x0, config, None, "ista", callback)


def fista(lasso, x0, config=None, callback=None):
    """FISTA; ``func`` restarts use the cached residual, ``grad`` the generalized gradient."""
    config = config or SolverConfig()
    return _fista_loop(lasso, x0, config, FistaMomentum(), f"fista({config.restart.label})", callback)


def _projected_loop(qp, x0, config, momentum, label, callback=None):
    if not isinstance(qp, BoxQP):
        raise InputError("projected solvers need a BoxQP")
    t = _fixed_step(config, qp)
    x = qp.project(_check_x0(qp, x0))
    y = x.copy()
    policy = config.restart.fresh()
    trace = Trace(label)
    fx = qp.value(x)
    trace.append(0, fx, 0.0, t, False)
    iterates = [x.copy()] if config.record_iterates else None
    for k in range(config.max_iters):
        g = qp.grad(y)
        x_new = qp.project(y - t * g)
        f_new = qp.value(x_new)
        if not math.isfinite(f_new):
            trace.final_x = x
            raise _diverged(trace, k + 1, f_new)
        dx = x_new - x
        gen = y - x_new
        if callback is not None:
            callback({"k": k, "y": y, "x": x, "x_next": x_new, "grad": g, "t": t})
        restart = policy.decide(f_curr=f_new, f_prev=fx, direction=gen, step=dx)
        if momentum is None:
            beta = 0.0
            y = x_new
        elif restart:
            momentum.reset()
            beta = 0.0
            y = x_new
        else:
            beta = momentum.advance()
            y = x_new + beta * dx
        x, fx = x_new, f_new
        trace.append(k + 1, fx, beta, t, restart)
        if iterates is not None:
            iterates.append(x.copy())
        if config.tol > 0 and float(np.linalg.norm(gen)) / t <= config.tol:
            break
    trace.final_x = x
    trace.iterates = iterates
    trace.info["restarts"] = policy.total_restarts
    return trace


def projected_gradient(qp, x0, config=None, callback=None):
    config = config or SolverConfig()
    return _projected_loop(qp, x0, config, None, "pg", callback)


def accel_projected_gradient(qp, x0, config=None, callback=None):
    """Accelerated projected gradient; the momentum sequence always uses ``q=0``."""
    config = config or SolverConfig()
    return _projected_loop(
        qp, x0, config, MomentumState(q=0.0), f"apg({config.restart.label})", callback
    )
