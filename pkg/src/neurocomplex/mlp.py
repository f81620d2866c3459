"""One hidden layer perceptron: evaluation, squared loss, backpropagation,
restart-based training, autoregressive embedding and the functional neuron.

Parameters flatten as ``(w_1, ..., w_k, b_1, ..., b_k, a_1, ..., a_k, beta)``
with each ``w_i`` laid out contiguously; every gradient in this module uses
that order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DivergedTrainingError, InputError

log = logging.getLogger(__name__)

TRANSFERS = ("tanh", "logistic")


def _logistic(z):
    # split form avoids overflow in exp for large |z|
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def transfer_fn(name):
    """Return ``(psi, dpsi)`` where ``dpsi`` takes ``psi(z)`` as argument."""
    if name == "tanh":
        return np.tanh, lambda h: 1.0 - h * h
    if name == "logistic":
        return _logistic, lambda h: h * (1.0 - h)
    raise InputError(f"unknown transfer function {name!r}; expected one of {TRANSFERS}")


@dataclass
class MlpParams:
    """Weights of ``F(x) = beta + sum_i a_i psi(w_i . x + b_i)``.

    ``hidden_weights`` has shape ``(k, p)``.
    """

    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    intercept: float
    transfer: str = "tanh"

    def __post_init__(self):
        self.hidden_weights = np.atleast_2d(np.asarray(self.hidden_weights, dtype=float))
        self.hidden_biases = np.asarray(self.hidden_biases, dtype=float).reshape(-1)
        self.output_weights = np.asarray(self.output_weights, dtype=float).reshape(-1)
        self.intercept = float(self.intercept)
        k = self.hidden_weights.shape[0]
        if k < 1 or self.hidden_weights.shape[1] < 1:
            raise InputError("an MLP needs at least one hidden unit and one input")
        if self.hidden_biases.shape != (k,) or self.output_weights.shape != (k,):
            raise InputError(
                f"inconsistent shapes: weights {self.hidden_weights.shape}, "
                f"biases {self.hidden_biases.shape}, output {self.output_weights.shape}"
            )
        transfer_fn(self.transfer)

    @property
    def input_dim(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def hidden_count(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def n_params(self) -> int:
        return parameter_count(self.hidden_count, self.input_dim)

    def flatten(self) -> np.ndarray:
        return np.concatenate(
            [self.hidden_weights.ravel(), self.hidden_biases, self.output_weights, [self.intercept]]
        )

    @classmethod
    def from_flat(cls, theta, k, p, transfer="tanh") -> "MlpParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (parameter_count(k, p),):
            raise InputError(f"expected {parameter_count(k, p)} parameters, got {theta.shape}")
        kp = k * p
        return cls(
            theta[:kp].reshape(k, p).copy(),
            theta[kp:kp + k].copy(),
            theta[kp + k:kp + 2 * k].copy(),
            float(theta[-1]),
            transfer,
        )

    def to_dict(self) -> dict:
        return {
            "inputDim": self.input_dim,
            "hiddenCount": self.hidden_count,
            "transfer": self.transfer,
            "hiddenWeights": self.hidden_weights.tolist(),
            "hiddenBiases": self.hidden_biases.tolist(),
            "outputWeights": self.output_weights.tolist(),
            "intercept": self.intercept,
        }

    @classmethod
    def from_dict(cls, d) -> "MlpParams":
        return cls(
            np.asarray(d["hiddenWeights"], dtype=float).reshape(d["hiddenCount"], d["inputDim"]),
            d["hiddenBiases"],
            d["outputWeights"],
            d["intercept"],
            d.get("transfer", "tanh"),
        )


def parameter_count(k: int, p: int) -> int:
    return k * (p + 2) + 1


class TrainingPair(NamedTuple):
    input: np.ndarray
    target: float


def as_arrays(pairs) -> tuple[np.ndarray, np.ndarray]:
    """Normalise training data to ``(X, y)`` arrays.

    Accepts either an ``(X, y)`` tuple of arrays or a sequence of
    :class:`TrainingPair`.
    """
    if isinstance(pairs, tuple) and len(pairs) == 2 and not isinstance(pairs[0], TrainingPair):
        X, y = pairs
    else:
        pairs = list(pairs)
        if not pairs:
            raise InputError("no training pairs")
        X = [np.atleast_1d(pr.input) for pr in pairs]
        y = [pr.target for pr in pairs]
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] == 0:
        raise InputError("no training pairs")
    if X.shape[0] != y.shape[0]:
        raise InputError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
    return X, y


def _check_inputs(params: MlpParams, X):
    if X.shape[-1] != params.input_dim:
        raise InputError(f"input has length {X.shape[-1]}, model expects {params.input_dim}")


def mlp_forward(params: MlpParams, x) -> float | np.ndarray:
    """Evaluate the network on one input vector or on the rows of a matrix."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    _check_inputs(params, X)
    psi, _ = transfer_fn(params.transfer)
    out = params.intercept + psi(X @ params.hidden_weights.T + params.hidden_biases) @ params.output_weights
    return float(out[0]) if single else out


def _normalised_weights(weights, n):
    if weights is None:
        return None
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != (n,) or np.any(w < 0) or w.sum() <= 0:
        raise InputError("sample weights must be nonnegative, one per pair, with positive sum")
    return w / w.sum()


def mse_loss(params: MlpParams, pairs, weights=None) -> float:
    """Mean squared error, optionally weighted (weights are normalised)."""
    X, y = as_arrays(pairs)
    r = y - mlp_forward(params, X)
    w = _normalised_weights(weights, len(y))
    if w is None:
        return float(np.mean(r * r))
    return float(np.dot(w, r * r))


def _loss_and_grad(theta, X, y, w, k, transfer):
    p = X.shape[1]
    kp = k * p
    W = theta[:kp].reshape(k, p)
    b = theta[kp:kp + k]
    a = theta[kp + k:kp + 2 * k]
    beta = theta[-1]
    psi, dpsi = transfer_fn(transfer)
    H = psi(X @ W.T + b)
    r = y - (beta + H @ a)
    if w is None:
        loss = np.mean(r * r)
        g = -2.0 * r / len(y)
    else:
        loss = np.dot(w, r * r)
        g = -2.0 * w * r
    dZ = np.outer(g, a) * dpsi(H)
    grad = np.concatenate([(dZ.T @ X).ravel(), dZ.sum(axis=0), H.T @ g, [g.sum()]])
    return float(loss), grad


def backprop_gradient(params: MlpParams, pairs, weights=None) -> np.ndarray:
    """Gradient of :func:`mse_loss` with respect to ``params.flatten()``."""
    X, y = as_arrays(pairs)
    _check_inputs(params, X)
    w = _normalised_weights(weights, len(y))
    return _loss_and_grad(params.flatten(), X, y, w, params.hidden_count, params.transfer)[1]


@dataclass
class TrainConfig:
    """Optimizer settings for :func:`train_mlp`.

    ``method`` is ``"lbfgs"`` (quasi-Newton, default) or ``"gd"`` (full-batch
    gradient descent with Armijo backtracking).
    """

    restarts: int = 5
    method: str = "lbfgs"
    max_iter: int = 500
    tol: float = 1e-10
    transfer: str = "tanh"
    init_scale: float = 0.7


def init_params(k, p, rng, y_mean=0.0, transfer="tanh", scale=0.7) -> MlpParams:
    W = rng.uniform(-scale, scale, size=(k, p)) / np.sqrt(p)
    b = rng.uniform(-scale, scale, size=k)
    a = rng.uniform(-scale, scale, size=k) / np.sqrt(k)
    return MlpParams(W, b, a, y_mean, transfer)


def _gradient_descent(fun, theta, max_iter, tol):
    f, g = fun(theta)
    step = 1.0
    for _ in range(max_iter):
        gg = float(g @ g)
        if not np.isfinite(f) or gg < tol * tol:
            break
        while True:
            cand = theta - step * g
            fc, gc = fun(cand)
            if np.isfinite(fc) and fc <= f - 1e-4 * step * gg:
                break
            step *= 0.5
            if step < 1e-20:
                return theta, f
        theta, f, g = cand, fc, gc
        step *= 2.0
    return theta, f


def _run_restart(X, y, w, theta0, k, config, restart):
    def fun(theta):
        return _loss_and_grad(theta, X, y, w, k, config.transfer)

    with np.errstate(invalid="ignore", over="ignore"):
        f0, g0 = fun(theta0)
    if not np.isfinite(f0) or not np.all(np.isfinite(g0)):
        raise DivergedTrainingError(restart)
    if config.method == "lbfgs":
        res = minimize(
            fun, theta0, jac=True, method="L-BFGS-B",
            options={"maxiter": config.max_iter, "gtol": config.tol, "ftol": 1e-15},
        )
        theta, f = res.x, float(res.fun)
    elif config.method == "gd":
        theta, f = _gradient_descent(fun, theta0, config.max_iter, config.tol)
    else:
        raise InputError(f"unknown optimizer {config.method!r}")
    if not np.isfinite(f):
        raise DivergedTrainingError(restart)
    if f > f0:
        return theta0, f0
    return theta, f


def train_mlp(pairs, k: int, config: TrainConfig | None = None, seed=0, weights=None,
              init: MlpParams | None = None) -> tuple[MlpParams, float]:
    """Fit a k-hidden-unit MLP by minimising the (weighted) squared loss.

    Runs ``config.restarts`` random restarts (plus ``init`` as restart 0 when
    given) and returns the best parameters with their loss. Restart ``r`` draws
    its initial point from ``default_rng([*seed, r])``, so results depend only
    on ``seed``. Ties go to the lowest restart index.
    """
    config = config or TrainConfig()
    X, y = as_arrays(pairs)
    if k < 1:
        raise InputError("k must be >= 1")
    w = _normalised_weights(weights, len(y))
    y_mean = float(np.mean(y) if w is None else np.dot(w, y))
    seed_key = list(np.atleast_1d(seed).astype(int))

    starts = []
    if init is not None:
        if init.hidden_count != k or init.input_dim != X.shape[1]:
            raise InputError("initial parameters do not match (k, p)")
        starts.append(init.flatten())
    for r in range(config.restarts):
        rng = np.random.default_rng(seed_key + [r])
        starts.append(init_params(k, X.shape[1], rng, y_mean, config.transfer, config.init_scale).flatten())
    if not starts:
        raise InputError("need at least one restart or an initial point")

    best, best_f, first_err = None, np.inf, None
    for r, theta0 in enumerate(starts):
        try:
            theta, f = _run_restart(X, y, w, theta0, k, config, r)
        except DivergedTrainingError as err:
            log.warning("%s", err)
            first_err = first_err or err
            continue
        if f < best_f:
            best, best_f = theta, f
    if best is None:
        raise first_err
    return MlpParams.from_flat(best, k, X.shape[1], config.transfer), best_f


def embed_autoregressive(series, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Build ``U_t = (Y_{t-1}, ..., Y_{t-p})`` -> ``Y_t`` pairs.

    Returns ``(X, y)`` with ``T - p`` rows, most recent lag first.
    """
    s = np.asarray(series, dtype=float).reshape(-1)
    T = len(s)
    if p < 1 or T <= p:
        raise InputError(f"need series length > p >= 1 (got T={T}, p={p})")
    X = np.column_stack([s[p - j - 1:T - j - 1] for j in range(p)])
    return X, s[p:].copy()


def trapezoid_weights(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if len(g) < 2:
        return np.ones(len(g))
    d = np.diff(g)
    w = np.zeros(len(g))
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


@dataclass
class FunctionalNeuron:
    """``psi(b + integral f w dmu)`` with ``w`` and ``mu`` sampled on a grid.

    ``quadrature_weights`` default to the trapezoid rule on ``grid_points``.
    """

    grid_points: np.ndarray
    weight_samples: np.ndarray
    bias: float = 0.0
    transfer: str = "tanh"
    quadrature_weights: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.grid_points = np.asarray(self.grid_points, dtype=float).reshape(-1)
        self.weight_samples = np.asarray(self.weight_samples, dtype=float).reshape(-1)
        if np.any(np.diff(self.grid_points) <= 0):
            raise InputError("grid points must be strictly increasing")
        if self.quadrature_weights is None:
            self.quadrature_weights = trapezoid_weights(self.grid_points)
        self.quadrature_weights = np.asarray(self.quadrature_weights, dtype=float).reshape(-1)
        G = len(self.grid_points)
        if self.weight_samples.shape != (G,) or self.quadrature_weights.shape != (G,):
            raise InputError("weight samples and quadrature weights must match the grid")
        if np.any(self.quadrature_weights < 0) or self.quadrature_weights.sum() <= 0:
            raise InputError("quadrature weights must be nonnegative with positive sum")
        transfer_fn(self.transfer)


def functional_neuron_forward(neuron: FunctionalNeuron, f_samples: Sequence[float]) -> float:
    f = np.asarray(f_samples, dtype=float).reshape(-1)
    if f.shape != neuron.grid_points.shape:
        raise InputError(f"expected {len(neuron.grid_points)} samples, got {len(f)}")
    psi, _ = transfer_fn(neuron.transfer)
    z = neuron.bias + np.sum(neuron.quadrature_weights * f * neuron.weight_samples)
    return float(psi(np.array([z]))[0])
