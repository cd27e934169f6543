"""Objective oracles, proximal maps and seeded problem generators.

All generators draw from ``numpy.random.Generator(numpy.random.PCG64(seed))``
in a fixed order, so an instance is a pure function of its arguments and the
numpy PCG64 stream definition.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exceptions import InputError

__all__ = [
    "Quadratic",
    "LogSumExp",
    "LassoProblem",
    "BoxQP",
    "eval_value",
    "eval_grad",
    "soft_threshold",
    "project_box",
    "gen_quadratic",
    "gen_logsumexp",
    "gen_lasso",
    "gen_boxqp",
    "to_dict",
    "from_dict",
    "save_problem",
    "load_problem",
]


def _rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


def _as_vector(x, n, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n:
        raise InputError(f"{name} must be a vector of length {n}, got shape {x.shape}")
    return x


def _haar_orthogonal(rng, n):
    # QR of a Gaussian matrix with the sign fix gives a Haar-distributed basis
    g = rng.standard_normal((n, n))
    qmat, rmat = np.linalg.qr(g)
    return qmat * np.sign(np.diag(rmat))


def _log_spectrum(n, cond, top=1.0):
    return top * np.logspace(-math.log10(cond), 0.0, n)


def _spd_from_spectrum(vecs, eigs):
    a = (vecs * eigs) @ vecs.T
    return 0.5 * (a + a.T)


@dataclass(frozen=True, eq=False)
class Quadratic:
    """``f(x) = 0.5 x'Ax + q'x`` with its eigendecomposition kept alongside.

    ``eigvals`` is sorted ascending and ``eigvecs[:, i]`` pairs with
    ``eigvals[i]``.
    """

    A: np.ndarray
    q: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    seed: int = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise InputError("A must be square")
        scale = max(np.abs(self.A).max(), 1e-300)
        if np.abs(self.A - self.A.T).max() > 1e-12 * scale:
            raise InputError("A must be symmetric")
        if np.any(self.eigvals <= 0):
            raise InputError("A must be positive definite")

    @classmethod
    def from_matrix(cls, A, q=None):
        """Build from a dense symmetric matrix, eigendecomposing it once."""
        A = np.array(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InputError("A must be square")
        eigvals, eigvecs = np.linalg.eigh(0.5 * (A + A.T))
        q = np.zeros(A.shape[0]) if q is None else np.array(q, dtype=np.float64)
        return cls(A, q, eigvals, eigvecs)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def L(self):
        return float(self.eigvals[-1])

    @property
    def mu(self):
        return float(self.eigvals[0])

    @property
    def x_star(self):
        # solve in the stored eigenbasis: x* = -V diag(1/lam) V' q
        return -(self.eigvecs @ ((self.eigvecs.T @ self.q) / self.eigvals))

    @property
    def f_star(self):
        xs = self.x_star
        return float(0.5 * (xs @ (self.A @ xs)) + self.q @ xs)

    def value(self, x):
        return float(0.5 * (x @ (self.A @ x)) + self.q @ x)

    def grad(self, x):
        return self.A @ x + self.q

    def modes(self, x):
        """Coordinates of ``x - x*`` in the eigenbasis."""
        return self.eigvecs.T @ (np.asarray(x, dtype=np.float64) - self.x_star)


@dataclass(frozen=True, eq=False)
class LogSumExp:
    """``f(x) = rho * log(sum_i exp((a_i'x - b_i) / rho))``; rows of ``A`` are the ``a_i``."""

    A: np.ndarray
    b: np.ndarray
    rho: float
    seed: int = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rho > 0:
            raise InputError("rho must be positive")

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def L(self):
        # Hessian is A'(diag(w) - ww')A / rho and diag(w) - ww' <= I
        return float(np.linalg.norm(self.A, 2) ** 2 / self.rho)

    def _scaled(self, x):
        z = (self.A @ x - self.b) / self.rho
        zmax = z.max()
        e = np.exp(z - zmax)
        return z, zmax, e

    def value(self, x):
        _, zmax, e = self._scaled(x)
        return float(self.rho * (zmax + math.log(e.sum())))

    def weights(self, x):
        _, _, e = self._scaled(x)
        return e / e.sum()

    def grad(self, x):
        return self.A.T @ self.weights(x)


@dataclass(frozen=True, eq=False)
class LassoProblem:
    """``0.5 ||Ax - b||^2 + rho ||x||_1``.

    The instance is immutable; solvers keep the running ``A @ x`` product in
    their own state and call :meth:`value_from_product`.
    """

    A: np.ndarray
    b: np.ndarray
    rho: float
    x_true: np.ndarray = None
    seed: int = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rho > 0:
            raise InputError("rho must be positive")

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def L(self):
        """``lambda_max(A'A)``."""
        return float(np.linalg.norm(self.A, 2) ** 2)

    def value_from_product(self, Ax, x):
        r = Ax - self.b
        return float(0.5 * (r @ r) + self.rho * np.abs(x).sum())

    def value(self, x):
        return self.value_from_product(self.A @ x, x)

    def smooth_grad_from_product(self, Ax):
        return self.A.T @ (Ax - self.b)

    def smooth_grad(self, x):
        return self.smooth_grad_from_product(self.A @ x)

    def prox(self, v, t):
        return _kernels.soft_threshold(v, self.rho * t)


@dataclass(frozen=True, eq=False)
class BoxQP:
    """``0.5 x'Qx + q'x`` subject to ``lo <= x <= hi``."""

    Q: np.ndarray
    q: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    eigvals: np.ndarray = None
    seed: int = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.lo >= self.hi):
            raise InputError("box bounds need lo < hi elementwise")

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def L(self):
        if self.eigvals is not None:
            return float(self.eigvals[-1])
        return float(np.linalg.eigvalsh(self.Q)[-1])

    def value(self, x):
        return float(0.5 * (x @ (self.Q @ x)) + self.q @ x)

    def grad(self, x):
        return self.Q @ x + self.q

    def project(self, z):
        return _kernels.clip_box(z, self.lo, self.hi)

    def active_count(self, x, tol=1e-9):
        return int(np.sum((x <= self.lo + tol) | (x >= self.hi - tol)))


def eval_value(obj, x):
    """Objective value at ``x`` (composite value for lasso and box-QP)."""
    return obj.value(_as_vector(x, obj.n))


def eval_grad(obj, x):
    """Gradient of a smooth objective at ``x``."""
    x = _as_vector(x, obj.n)
    if isinstance(obj, LassoProblem):
        return obj.smooth_grad(x)
    return obj.grad(x)


def soft_threshold(v, alpha):
    """Elementwise ``sign(v) * max(|v| - alpha, 0)``."""
    if not alpha >= 0:
        raise InputError(f"threshold must be nonnegative, got {alpha}")
    return _kernels.soft_threshold(np.atleast_1d(np.asarray(v, dtype=np.float64)), alpha)


def project_box(z, a, b):
    """Clamp ``z`` onto ``[a, b]`` elementwise."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    a = np.broadcast_to(np.asarray(a, dtype=np.float64), z.shape)
    b = np.broadcast_to(np.asarray(b, dtype=np.float64), z.shape)
    if np.any(a >= b):
        raise InputError("box bounds need a < b elementwise")
    return _kernels.clip_box(z, a, b)


def gen_quadratic(n, cond, seed, with_linear=False, spectrum="loguniform"):
    """Random SPD quadratic with ``L = 1`` and ``mu = 1/cond``.

    Parameters
    ----------
    n : int
        Dimension, at least 2.
    cond : float
        Condition number ``L/mu``.
    seed : int
        PCG64 seed; draws the orthogonal basis first, then ``x*``.
    with_linear : bool
        Draw a standard normal minimizer ``x*`` and set ``q = -A x*`` so the
        optimal value is nonzero. Otherwise ``x* = 0`` and ``f* = 0``.
    spectrum : {"loguniform", "linear"}
        Eigenvalue spacing between ``1/cond`` and 1, endpoints included.
        ``"linear"`` leaves the smallest eigenvalue isolated from the rest,
        so a single slow mode dominates late iterates.
    """
    if n < 2:
        raise InputError("n must be at least 2")
    if not cond >= 1:
        raise InputError("cond must be >= 1")
    if spectrum == "loguniform":
        eigs = _log_spectrum(n, cond)
    elif spectrum == "linear":
        eigs = np.linspace(1.0 / cond, 1.0, n)
    else:
        raise InputError(f"unknown spectrum {spectrum!r}")
    rng = _rng(seed)
    vecs = _haar_orthogonal(rng, n)
    A = _spd_from_spectrum(vecs, eigs)
    if with_linear:
        xs = rng.standard_normal(n)
        q = -(vecs @ (eigs * (vecs.T @ xs)))
    else:
        q = np.zeros(n)
    params = {
        "n": int(n), "cond": float(cond),
        "with_linear": bool(with_linear), "spectrum": spectrum,
    }
    return Quadratic(A=A, q=q, eigvals=eigs, eigvecs=vecs, seed=int(seed), params=params)


def gen_logsumexp(n, m, rho, seed):
    if not rho > 0:
        raise InputError("rho must be positive")
    rng = _rng(seed)
    A = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    params = {"n": int(n), "m": int(m), "rho": float(rho)}
    return LogSumExp(A=A, b=b, rho=float(rho), seed=int(seed), params=params)


def gen_lasso(n, m, s, rho, noise_sigma, seed):
    if s > n or s < 0:
        raise InputError(f"sparsity s={s} must lie in [0, n={n}]")
    if noise_sigma < 0:
        raise InputError("noise_sigma must be nonnegative")
    rng = _rng(seed)
    A = rng.standard_normal((m, n))
    x_true = np.zeros(n)
    support = rng.choice(n, size=s, replace=False)
    x_true[support] = rng.standard_normal(s)
    w = noise_sigma * rng.standard_normal(m)
    b = A @ x_true + w
    params = {
        "n": int(n), "m": int(m), "s": int(s),
        "rho": float(rho), "noise_sigma": float(noise_sigma),
    }
    return LassoProblem(A=A, b=b, rho=float(rho), x_true=x_true, seed=int(seed), params=params)


def gen_boxqp(n, cond, seed, lambda_max=9.0):
    """Box-constrained QP on ``[-1, 1]^n`` with ``lambda_max(Q)/lambda_min(Q) = cond``.

    The spectrum of ``Q`` is evenly spaced on ``[lambda_max/cond, lambda_max]``.
    The default scale leaves a two-digit number of active bounds at the
    optimum for ``n=500, cond=1e7`` (about 70 across seeds).
    """
    if n < 2:
        raise InputError("n must be at least 2")
    if not cond >= 1:
        raise InputError("cond must be >= 1")
    rng = _rng(seed)
    eigs = np.linspace(lambda_max / cond, lambda_max, n)
    vecs = _haar_orthogonal(rng, n)
    Q = _spd_from_spectrum(vecs, eigs)
    q = rng.standard_normal(n)
    params = {"n": int(n), "cond": float(cond), "lambda_max": float(lambda_max)}
    return BoxQP(Q=Q, q=q, lo=-np.ones(n), hi=np.ones(n), eigvals=eigs,
                 seed=int(seed), params=params)


_TYPES = {
    Quadratic: ("quadratic", ("A", "q", "eigvals", "eigvecs")),
    LogSumExp: ("logsumexp", ("A", "b")),
    LassoProblem: ("lasso", ("A", "b", "x_true")),
    BoxQP: ("boxqp", ("Q", "q", "lo", "hi", "eigvals")),
}
_BY_NAME = {name: (cls, keys) for cls, (name, keys) in _TYPES.items()}


def to_dict(problem):
    """JSON-ready document ``{"type", "seed", "params", "data"}``.

    Arrays are nested lists in row-major order; Python's float repr
    round-trips every double exactly.
    """
    try:
        name, keys = _TYPES[type(problem)]
    except KeyError:
        raise InputError(f"cannot serialize {type(problem).__name__}") from None
    data = {}
    for key in keys:
        arr = getattr(problem, key)
        data[key] = None if arr is None else np.asarray(arr).tolist()
    if hasattr(problem, "rho"):
        data["rho"] = problem.rho
    return {"type": name, "seed": problem.seed, "params": dict(problem.params), "data": data}


def from_dict(doc):
    try:
        cls, keys = _BY_NAME[doc["type"]]
    except KeyError:
        raise InputError(f"unknown problem type {doc.get('type')!r}") from None
    data = doc["data"]
    kwargs = {}
    for key in keys:
        val = data.get(key)
        kwargs[key] = None if val is None else np.asarray(val, dtype=np.float64)
    if "rho" in data:
        kwargs["rho"] = float(data["rho"])
    return cls(seed=doc.get("seed"), params=dict(doc.get("params", {})), **kwargs)


def save_problem(problem, path):
    with open(path, "w") as fh:
        json.dump(to_dict(problem), fh)


def load_problem(path):
    with open(path) as fh:
        return from_dict(json.load(fh))
