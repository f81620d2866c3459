"""Regime-switching autoregression: a hidden Markov chain picks which MLP
regressor and noise scale generate the next observation.

    Y_{t+1} = F_{X_{t+1}}(Y_t, ..., Y_{t-p+1}) + sigma_{X_{t+1}} eps_{t+1}

All likelihood computations condition on ``p`` warm-start values that precede
the modelled series.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericError
from .mlp import MlpParams, TrainConfig, embed_autoregressive, mlp_forward, train_mlp

log = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-6
_LOG_2PI = np.log(2 * np.pi)


@dataclass
class HmmMlpParams:
    transition: np.ndarray
    initial: np.ndarray
    regressors: list[MlpParams]
    noise_scales: np.ndarray

    def __post_init__(self):
        self.transition = np.atleast_2d(np.asarray(self.transition, dtype=float))
        self.initial = np.asarray(self.initial, dtype=float).reshape(-1)
        self.noise_scales = np.asarray(self.noise_scales, dtype=float).reshape(-1)
        N = len(self.initial)
        if N < 1:
            raise InputError("need at least one state")
        if self.transition.shape != (N, N) or len(self.regressors) != N or self.noise_scales.shape != (N,):
            raise InputError("transition, initial, regressors and noise scales disagree on the state count")
        if np.any(self.transition < 0) or np.any(np.abs(self.transition.sum(axis=1) - 1) > 1e-12):
            raise InputError("transition rows must be probability vectors")
        if np.any(self.initial < 0) or abs(self.initial.sum() - 1) > 1e-12:
            raise InputError("initial distribution must sum to 1")
        if np.any(self.noise_scales < 0):
            raise InputError("noise scales must be nonnegative")
        orders = {f.input_dim for f in self.regressors}
        if len(orders) != 1:
            raise InputError("all regressors must share the same order p")

    @property
    def n_states(self) -> int:
        return len(self.initial)

    @property
    def order(self) -> int:
        return self.regressors[0].input_dim

    def permuted(self, perm) -> "HmmMlpParams":
        """Relabel states so that new state ``i`` is old state ``perm[i]``."""
        perm = np.asarray(perm)
        return HmmMlpParams(
            self.transition[np.ix_(perm, perm)],
            self.initial[perm],
            [self.regressors[i] for i in perm],
            self.noise_scales[perm],
        )

    def to_dict(self) -> dict:
        return {
            "stateCount": self.n_states,
            "order": self.order,
            "transition": self.transition.tolist(),
            "initial": self.initial.tolist(),
            "noiseScales": self.noise_scales.tolist(),
            "regressors": [f.to_dict() for f in self.regressors],
            "flatteningOrder": "hiddenWeights(row-major k x p), hiddenBiases, outputWeights, intercept",
        }

    @classmethod
    def from_dict(cls, d) -> "HmmMlpParams":
        return cls(d["transition"], d["initial"], [MlpParams.from_dict(r) for r in d["regressors"]],
                   d["noiseScales"])


def _lagged(series, warm_start, p):
    """Design matrix whose row t holds the p values preceding ``series[t]``."""
    y = np.asarray(series, dtype=float).reshape(-1)
    warm = np.asarray(warm_start, dtype=float).reshape(-1)
    if len(y) < 1:
        raise InputError("series must be nonempty")
    if len(warm) != p:
        raise InputError(f"warm start must hold exactly p={p} values, got {len(warm)}")
    full = np.concatenate([warm, y])
    X, _ = embed_autoregressive(full, p)
    return X, y


def log_emissions(params: HmmMlpParams, series, warm_start) -> np.ndarray:
    """``(T, N)`` array of Gaussian log densities of each observation under each state."""
    X, y = _lagged(series, warm_start, params.order)
    out = np.empty((len(y), params.n_states))
    with np.errstate(over="ignore", divide="ignore"):
        for i, (f, s) in enumerate(zip(params.regressors, params.noise_scales)):
            r = y - mlp_forward(f, X)
            out[:, i] = -0.5 * _LOG_2PI - np.log(s) - 0.5 * (r / s) ** 2
    return out


def _check_emissions(logb):
    bad = ~np.isfinite(logb).any(axis=1) | np.isnan(logb).any(axis=1) | np.isposinf(logb).any(axis=1)
    if bad.any():
        t = int(np.argmax(bad))
        raise NumericError(f"non-finite emission density at time index {t}")


def _forward(params, logb):
    T, N = logb.shape
    A = params.transition
    alpha = np.empty((T, N))
    scale = np.empty(T)
    m = logb.max(axis=1, keepdims=True)
    b = np.exp(logb - m)
    prev = params.initial
    for t in range(T):
        a = b[t] * (prev if t == 0 else alpha[t - 1] @ A)
        c = a.sum()
        if not c > 0 or not np.isfinite(c):
            raise NumericError(f"forward normaliser vanished at time index {t}")
        alpha[t] = a / c
        scale[t] = c
    return alpha, np.log(scale) + m[:, 0]


def forward_log_likelihood(params: HmmMlpParams, series, warm_start) -> float:
    """``log p(Y_1..T | warm start)`` by the scaled forward recursion."""
    logb = log_emissions(params, series, warm_start)
    _check_emissions(logb)
    _, logc = _forward(params, logb)
    ll = float(logc.sum())
    if not np.isfinite(ll):
        raise NumericError("log-likelihood is not finite")
    return ll


def forward_backward(params: HmmMlpParams, logb):
    """State posteriors ``gamma (T, N)``, summed pair posteriors ``xi (N, N)``, log-likelihood."""
    T, N = logb.shape
    A = params.transition
    alpha, logc = _forward(params, logb)
    m = logb.max(axis=1, keepdims=True)
    b = np.exp(logb - m)
    c = np.exp(logc - m[:, 0])
    beta = np.ones((T, N))
    for t in range(T - 2, -1, -1):
        beta[t] = A @ (b[t + 1] * beta[t + 1]) / c[t + 1]
    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)
    xi = np.zeros((N, N))
    for t in range(T - 1):
        xi += np.outer(alpha[t], b[t + 1] * beta[t + 1]) * A / c[t + 1]
    return gamma, xi, float(logc.sum())


def viterbi_decode(params: HmmMlpParams, series, warm_start) -> np.ndarray:
    """Most probable state path; ties go to the lower state index."""
    logb = log_emissions(params, series, warm_start)
    _check_emissions(logb)
    T, N = logb.shape
    with np.errstate(divide="ignore"):
        logA = np.log(params.transition)
        delta = np.log(params.initial) + logb[0]
    back = np.zeros((T, N), dtype=int)
    for t in range(1, T):
        cand = delta[:, None] + logA
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(N)] + logb[t]
    path = np.empty(T, dtype=int)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def path_log_probability(params: HmmMlpParams, series, warm_start, path) -> float:
    """Joint log-probability of the observations and a given state path."""
    logb = log_emissions(params, series, warm_start)
    path = np.asarray(path)
    with np.errstate(divide="ignore"):
        lp = np.log(params.initial[path[0]]) + logb[0, path[0]]
        for t in range(1, len(path)):
            lp += np.log(params.transition[path[t - 1], path[t]]) + logb[t, path[t]]
    return float(lp)


def simulate(params: HmmMlpParams, T: int, warm_start, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``T`` observations and their hidden states."""
    if T < 1:
        raise InputError("T must be >= 1")
    p = params.order
    warm = np.asarray(warm_start, dtype=float).reshape(-1)
    if len(warm) != p:
        raise InputError(f"warm start must hold exactly p={p} values")
    rng = np.random.default_rng(seed)
    N = params.n_states
    hist = list(warm)
    ys = np.empty(T)
    states = np.empty(T, dtype=int)
    s = rng.choice(N, p=params.initial)
    for t in range(T):
        if t > 0:
            s = rng.choice(N, p=params.transition[s])
        past = np.array(hist[-1:-p - 1:-1])
        eps = rng.standard_normal()
        ys[t] = mlp_forward(params.regressors[s], past) + params.noise_scales[s] * eps
        states[t] = s
        hist.append(ys[t])
    return ys, states


@dataclass
class GemConfig:
    """Settings for :func:`gem_fit`.

    ``refit`` controls the single bounded MLP refit done per state and
    iteration (its ``max_iter`` bounds the inner optimizer).
    """

    iterations: int = 50
    hidden_count: int = 2
    refit: TrainConfig = field(default_factory=lambda: TrainConfig(restarts=0, max_iter=30))
    init_restarts: int = 3
    tol: float = 0.0


def _kmeans_1d_labels(v, N, rng, iters=50):
    centers = np.sort(rng.choice(v, size=N, replace=False))
    for _ in range(iters):
        lab = np.argmin(np.abs(v[:, None] - centers[None, :]), axis=1)
        new = np.array([v[lab == i].mean() if np.any(lab == i) else centers[i] for i in range(N)])
        if np.allclose(new, centers):
            break
        centers = new
    return lab


def _m_step(params, X, y, gamma, xi, config, seed, it):
    N = params.n_states
    init = gamma[0] / gamma[0].sum()
    A = params.transition.copy()
    for i in range(N):
        row = xi[i].sum()
        if row > 0:
            A[i] = xi[i] / row
        else:
            log.warning("state %d has no expected transitions; keeping its transition row", i)
    A /= A.sum(axis=1, keepdims=True)

    regs, sig = [], params.noise_scales.copy()
    for i in range(N):
        w = gamma[:, i]
        if w.sum() <= 1e-300:
            log.warning("state %d collapsed (zero posterior weight); parameters kept", i)
            regs.append(params.regressors[i])
            continue
        f, _ = train_mlp((X, y), params.regressors[i].hidden_count, config.refit,
                         seed=[seed, it, i], weights=w, init=params.regressors[i])
        r = y - mlp_forward(f, X)
        sig[i] = max(np.sqrt(np.dot(w, r * r) / w.sum()), SIGMA_FLOOR)
        regs.append(f)
    return HmmMlpParams(A, init / init.sum(), regs, sig)


def _initial_params(X, y, N, config, seed):
    rng = np.random.default_rng([seed, 0])
    lab = _kmeans_1d_labels(y, N, rng) if N > 1 else np.zeros(len(y), dtype=int)
    regs, sig = [], np.empty(N)
    init_cfg = TrainConfig(restarts=config.init_restarts, max_iter=config.refit.max_iter,
                           transfer=config.refit.transfer)
    for i in range(N):
        w = (lab == i).astype(float) + 1e-3
        f, _ = train_mlp((X, y), config.hidden_count, init_cfg, seed=[seed, 1, i], weights=w)
        r = y - mlp_forward(f, X)
        sig[i] = max(np.sqrt(np.dot(w, r * r) / w.sum()), SIGMA_FLOOR)
        regs.append(f)
    A = np.full((N, N), 0.1 / max(N - 1, 1))
    np.fill_diagonal(A, 0.9)
    if N == 1:
        A[:] = 1.0
    return HmmMlpParams(A, np.full(N, 1.0 / N), regs, sig)


def gem_fit(series, n_states: int, p: int, config: GemConfig | None = None,
            seed: int = 0) -> tuple[HmmMlpParams, list[float]]:
    """Generalized EM fit.

    The first ``p`` observations are used as warm start only. Returns the
    fitted parameters and the log-likelihood after every E-step plus the
    final one.
    """
    config = config or GemConfig()
    s = np.asarray(series, dtype=float).reshape(-1)
    if n_states < 1:
        raise InputError("need at least one state")
    if len(s) <= p + 1:
        raise InputError(f"series length must exceed p + 1 = {p + 1}")
    warm, y = s[:p], s[p:]
    X, _ = _lagged(y, warm, p)

    params = _initial_params(X, y, n_states, config, seed)
    trace = []
    for it in range(config.iterations):
        logb = log_emissions(params, y, warm)
        _check_emissions(logb)
        gamma, xi, ll = forward_backward(params, logb)
        trace.append(ll)
        if it > 0 and config.tol > 0 and ll - trace[-2] < config.tol:
            break
        params = _m_step(params, X, y, gamma, xi, config, seed, it)
    else:
        trace.append(forward_log_likelihood(params, y, warm))
    return params, trace
