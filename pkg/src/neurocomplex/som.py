"""Batch self-organizing map on vector data, plus the lattice/neighbourhood
machinery shared by the dissimilarity and kernel variants.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MapLattice:
    """Neurons on a 2-d grid (row-major numbering) or a 1-d string."""

    shape: str
    rows: int
    cols: int = 1
    metric: str = "euclidean"

    def __post_init__(self):
        if self.shape not in ("grid", "string"):
            raise InputError(f"unknown lattice shape {self.shape!r}")
        if self.metric not in ("euclidean", "manhattan"):
            raise InputError(f"unknown lattice metric {self.metric!r}")
        if self.rows < 1 or self.cols < 1 or (self.shape == "string" and self.cols != 1):
            raise InputError("lattice dimensions must be positive (string lattices have one column)")

    @classmethod
    def grid(cls, rows, cols, metric="euclidean"):
        return cls("grid", int(rows), int(cols), metric)

    @classmethod
    def string(cls, length, metric="euclidean"):
        return cls("string", int(length), 1, metric)

    @property
    def n_neurons(self) -> int:
        return self.rows * self.cols

    @property
    def coords(self) -> np.ndarray:
        if self.shape == "string":
            return np.arange(self.rows)[:, None]
        r, c = np.divmod(np.arange(self.n_neurons), self.cols)
        return np.column_stack([r, c])

    def distances(self) -> np.ndarray:
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        if self.metric == "manhattan":
            return np.abs(diff).sum(axis=-1).astype(float)
        return np.sqrt((diff ** 2).sum(axis=-1))

    def to_dict(self) -> dict:
        d = {"shape": self.shape, "metric": self.metric}
        if self.shape == "grid":
            d.update(rows=self.rows, cols=self.cols)
        else:
            d.update(length=self.rows)
        return d

    @classmethod
    def from_dict(cls, d):
        if d["shape"] == "grid":
            return cls.grid(d["rows"], d["cols"], d.get("metric", "euclidean"))
        return cls.string(d["length"], d.get("metric", "euclidean"))


@dataclass(frozen=True)
class NeighborhoodSchedule:
    """Radius decreasing linearly from ``initial_radius`` to ``final_radius``."""

    kind: str = "gaussian"
    initial_radius: float = 2.0
    final_radius: float = 0.5
    sweeps: int = 30

    def __post_init__(self):
        if self.kind not in ("gaussian", "window"):
            raise InputError(f"unknown neighbourhood kind {self.kind!r}")
        if not self.initial_radius >= self.final_radius > 0:
            raise InputError("need initial_radius >= final_radius > 0")
        if self.sweeps < 1:
            raise InputError("need at least one sweep")

    def radius(self, sweep: int) -> float:
        if not 0 <= sweep < self.sweeps:
            raise InputError(f"sweep index {sweep} outside [0, {self.sweeps})")
        if self.sweeps == 1:
            return self.initial_radius
        frac = sweep / (self.sweeps - 1)
        return self.initial_radius + (self.final_radius - self.initial_radius) * frac

    def weights(self, lattice: MapLattice, sweep: int) -> np.ndarray:
        """``(M, M)`` matrix of neighbourhood weights at a sweep."""
        return _kernel(self.kind, lattice.distances(), self.radius(sweep))

    @classmethod
    def default_for(cls, lattice: MapLattice, sweeps=30, kind="gaussian"):
        r0 = max(lattice.rows, lattice.cols) / 2.0
        return cls(kind, max(r0, 0.5), 0.5, sweeps)


def _kernel(kind, dist, r):
    if kind == "gaussian":
        return np.exp(-dist ** 2 / (2 * r * r))
    return (dist <= r).astype(float)


def neighborhood_weight(schedule: NeighborhoodSchedule, lattice: MapLattice, c: int, d: int,
                        sweep: int) -> float:
    M = lattice.n_neurons
    if not (0 <= c < M and 0 <= d < M):
        raise InputError(f"neuron index out of range [0, {M})")
    dist = lattice.distances()[c, d]
    return float(_kernel(schedule.kind, np.array(dist), schedule.radius(sweep)))


def _as_data(data):
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("data must be a nonempty 2-d array")
    return X


def squared_distances(X, P) -> np.ndarray:
    return ((X[:, None, :] - P[None, :, :]) ** 2).sum(axis=-1)


def assign(x, prototypes) -> int | np.ndarray:
    """Index of the closest prototype (lowest index on ties); vectorised over rows."""
    P = np.atleast_2d(np.asarray(prototypes, dtype=float))
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != P.shape[1]:
        raise InputError(f"input dimension {X.shape[1]} does not match prototypes {P.shape[1]}")
    idx = np.argmin(squared_distances(X, P), axis=1)
    return int(idx[0]) if single else idx


def initial_indices(n, M, rng) -> np.ndarray:
    """Distinct observation indices used to seed the M prototypes."""
    if n < M:
        log.warning("fewer observations (%d) than neurons (%d); sampling with replacement", n, M)
        return rng.choice(n, size=M, replace=True)
    return rng.choice(n, size=M, replace=False)


@dataclass
class SomResult:
    prototypes: np.ndarray
    assignments: np.ndarray
    energy: list[float] = field(default_factory=list)
    history: list[np.ndarray] = field(default_factory=list)


def batch_som_train(data, lattice: MapLattice, schedule: NeighborhoodSchedule | None = None,
                    seed=0, init=None) -> SomResult:
    """Batch SOM.

    Each sweep assigns every point to its closest prototype, then replaces
    ``p_c`` by ``sum_i G(N(x_i), c) x_i / sum_i G(N(x_i), c)``. Neurons whose
    denominator is zero keep their prototype. ``energy[s]`` is the
    neighbourhood-weighted squared distortion (per point) at sweep ``s`` and
    ``history[s]`` the assignments used for that sweep's update.
    """
    X = _as_data(data)
    schedule = schedule or NeighborhoodSchedule.default_for(lattice)
    if init is None:
        P = X[initial_indices(len(X), lattice.n_neurons, np.random.default_rng(seed))].copy()
    else:
        P = np.array(init, dtype=float)
        if P.shape != (lattice.n_neurons, X.shape[1]):
            raise InputError(f"initial prototypes must have shape {(lattice.n_neurons, X.shape[1])}")
    energy, history = [], []
    for s in range(schedule.sweeps):
        D2 = squared_distances(X, P)
        bmu = np.argmin(D2, axis=1)
        G = schedule.weights(lattice, s)[bmu]  # (n, M)
        energy.append(float((G * D2).sum() / len(X)))
        history.append(bmu)
        den = G.sum(axis=0)
        live = den > 0
        P[live] = (G[:, live].T @ X) / den[live, None]
    return SomResult(P, assign(X, P), energy, history)


def map_quality(data, prototypes, lattice: MapLattice) -> tuple[float, float]:
    """Quantization error (mean distance to the best neuron) and topographic
    error (share of points whose two best neurons are not lattice neighbours)."""
    X = _as_data(data)
    P = np.atleast_2d(np.asarray(prototypes, dtype=float))
    D2 = squared_distances(X, P)
    order = np.argsort(D2, axis=1, kind="stable")
    qe = float(np.mean(np.sqrt(D2[np.arange(len(X)), order[:, 0]])))
    if P.shape[0] < 2:
        return qe, 0.0
    ld = lattice.distances()
    te = float(np.mean(ld[order[:, 0], order[:, 1]] != 1.0))
    return qe, te


def u_matrix(prototypes, lattice: MapLattice) -> np.ndarray:
    """Mean prototype distance from each neuron to its lattice neighbours."""
    P = np.atleast_2d(np.asarray(prototypes, dtype=float))
    nb = lattice.distances() == 1.0
    D = np.sqrt(squared_distances(P, P))
    out = np.zeros(len(P))
    for c in range(len(P)):
        if nb[c].any():
            out[c] = D[c, nb[c]].mean()
    return out


def derivative_preprocess(samples, grid) -> np.ndarray:
    """Finite-difference derivative: central inside, one-sided at both ends.

    Works row-wise on a 2-d array of sampled functions.
    """
    f = np.asarray(samples, dtype=float)
    g = np.asarray(grid, dtype=float).reshape(-1)
    if len(g) < 2 or f.shape[-1] != len(g):
        raise InputError("need at least two samples matching the grid")
    if np.any(np.diff(g) <= 0):
        raise InputError("grid must be strictly increasing")
    out = np.empty(f.shape)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (g[2:] - g[:-2])
    out[..., 0] = (f[..., 1] - f[..., 0]) / (g[1] - g[0])
    out[..., -1] = (f[..., -1] - f[..., -2]) / (g[-1] - g[-2])
    return out


def segment_costs(x) -> np.ndarray:
    """``cost[i, j]`` = squared error of the mean fit on ``x[i:j]`` (j > i)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    H = len(x)
    cost = np.full((H + 1, H + 1), np.inf)
    xs = x.tolist()
    for i in range(H):
        # Welford update: exact zero on constant runs
        mean, m2 = 0.0, 0.0
        for n, v in enumerate(xs[i:], start=1):
            delta = v - mean
            mean += delta / n
            m2 += delta * (v - mean)
            cost[i, i + n] = m2
    return cost


def segment_project_prototype(samples, n_segments: int):
    """Best piecewise-constant approximation with ``n_segments`` pieces.

    Returns ``(fitted, breakpoints, error)``; ``breakpoints`` are the start
    indices of segments 2..S.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    H, S = len(x), int(n_segments)
    if not 1 <= S <= H:
        raise InputError(f"need 1 <= segments <= {H}, got {S}")
    cost = segment_costs(x)
    best = np.full((S + 1, H + 1), np.inf)
    arg = np.zeros((S + 1, H + 1), dtype=int)
    best[0, 0] = 0.0
    for s in range(1, S + 1):
        for j in range(s, H + 1):
            cand = best[s - 1, s - 1:j] + cost[s - 1:j, j]
            i = int(np.argmin(cand))
            best[s, j] = cand[i]
            arg[s, j] = i + s - 1
    cuts, j = [], H
    for s in range(S, 0, -1):
        i = arg[s, j]
        cuts.append(i)
        j = i
    starts = sorted(cuts)
    bounds = starts + [H]
    fitted = np.empty(H)
    for a, b in zip(bounds[:-1], bounds[1:]):
        fitted[a:b] = x[a:b].mean()
    return fitted, starts[1:], float(best[S, H])
