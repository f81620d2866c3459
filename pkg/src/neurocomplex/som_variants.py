"""SOM variants for non-vector data.

* median SOM: prototypes are observations, chosen to minimise the
  neighbourhood-weighted dissimilarity to the data;
* q-median SOM: each neuron holds ``q`` observations;
* kernel SOM: prototypes are convex combinations of feature-space images,
  stored as coefficient rows and handled through the Gram matrix only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .metrics import DissimilarityMatrix, check_kernel_matrix
from .som import MapLattice, NeighborhoodSchedule, initial_indices


@dataclass
class SweepRecord:
    """What one batch sweep saw: its radius, the assignments used for the
    update and the prototypes before and after."""

    radius: float
    assignments: np.ndarray
    before: np.ndarray
    after: np.ndarray


@dataclass
class MedianMapState:
    prototype_index: np.ndarray
    assignments: np.ndarray
    distortion: list[float] = field(default_factory=list)
    history: list[SweepRecord] = field(default_factory=list)

    def to_dict(self):
        return {
            "prototypeIndex": self.prototype_index.tolist(),
            "assignments": self.assignments.tolist(),
            "distortion": self.distortion,
        }


@dataclass
class QMedianMapState:
    prototype_sets: np.ndarray  # (M, q)
    assignments: np.ndarray
    distortion: list[float] = field(default_factory=list)
    history: list[SweepRecord] = field(default_factory=list)

    def to_dict(self):
        return {
            "prototypeSets": self.prototype_sets.tolist(),
            "assignments": self.assignments.tolist(),
            "distortion": self.distortion,
        }


@dataclass
class KernelMapState:
    coefficients: np.ndarray  # (M, n), rows on the simplex
    assignments: np.ndarray
    energy: list[float] = field(default_factory=list)
    history: list[np.ndarray] = field(default_factory=list)

    def to_dict(self):
        return {
            "coefficients": self.coefficients.tolist(),
            "assignments": self.assignments.tolist(),
            "energy": self.energy,
        }


def local_distortion(candidate: int, D, assignments, G, c: int) -> float:
    """``sum_i G[N(x_i), c] * D[i, candidate]`` for a single candidate prototype."""
    D = np.asarray(D)
    a = np.asarray(assignments)
    return float(np.dot(np.asarray(G)[a, c], D[:, candidate]))


def _check_init(init, shape, n):
    idx = np.asarray(init, dtype=int)
    if idx.shape != shape or idx.min() < 0 or idx.max() >= n:
        raise InputError(f"initial prototype indices must have shape {shape} with values in [0, {n})")
    return idx.copy()


def _candidate_costs(D, G_obs):
    # (M, n): cost of every observation as prototype of every neuron
    return G_obs.T @ D


def _is_fixed_point(schedule, s, old, new, old_assign, new_assign):
    return (schedule.radius(s) == schedule.final_radius and np.array_equal(old, new)
            and old_assign is not None and np.array_equal(old_assign, new_assign))


def median_som_train(D, lattice: MapLattice, schedule: NeighborhoodSchedule | None = None,
                     seed=0, stop_at_fixed_point: bool = True, init=None) -> MedianMapState:
    """Batch median SOM on a dissimilarity matrix.

    Observations go to the neuron whose prototype is least dissimilar (lowest
    neuron on ties); each prototype becomes the observation minimising
    ``sum_i G(N(x_i), c) d(x_i, p)`` (lowest observation on ties). Training
    ends after the sweep budget, or earlier once a sweep at the final radius
    changes neither assignments nor prototypes. ``distortion[s]`` is the
    weighted distortion after the update of sweep ``s``. ``init`` optionally
    fixes the starting prototype indices.
    """
    D = np.asarray(DissimilarityMatrix(D))
    schedule = schedule or NeighborhoodSchedule.default_for(lattice)
    n, M = D.shape[0], lattice.n_neurons
    if init is None:
        protos = initial_indices(n, M, np.random.default_rng(seed))
    else:
        protos = _check_init(init, (M,), n)
    trace, history, prev_assign = [], [], None
    for s in range(schedule.sweeps):
        assign = np.argmin(D[:, protos], axis=1)
        G = schedule.weights(lattice, s)
        costs = _candidate_costs(D, G[assign])
        new = np.argmin(costs, axis=1)
        history.append(SweepRecord(schedule.radius(s), assign, protos.copy(), new.copy()))
        trace.append(float(costs[np.arange(M), new].sum()))
        done = stop_at_fixed_point and _is_fixed_point(schedule, s, protos, new, prev_assign, assign)
        protos, prev_assign = new, assign
        if done:
            break
    return MedianMapState(protos, np.argmin(D[:, protos], axis=1), trace, history)


def set_dissimilarity(D, sets) -> np.ndarray:
    """``(n, M)`` mean dissimilarity of each observation to each neuron's set."""
    D = np.asarray(D)
    sets = np.asarray(sets)
    return D[:, sets].mean(axis=2)


def q_median_som_train(D, lattice: MapLattice, schedule: NeighborhoodSchedule | None = None,
                       q: int = 2, seed=0, stop_at_fixed_point: bool = True,
                       init=None) -> QMedianMapState:
    """Median SOM where each neuron is represented by ``q`` observations.

    The observation-to-neuron dissimilarity is the mean over the neuron's set.
    Sets are rebuilt by greedy forward selection: ``q`` passes, each adding the
    observation with the smallest increase of the weighted distortion.
    """
    D = np.asarray(DissimilarityMatrix(D))
    schedule = schedule or NeighborhoodSchedule.default_for(lattice)
    n, M = D.shape[0], lattice.n_neurons
    if q < 1 or q * M > n:
        raise InputError(f"need 1 <= q and q * M <= n (q={q}, M={M}, n={n})")
    if init is None:
        sets = initial_indices(n, q * M, np.random.default_rng(seed)).reshape(M, q)
    else:
        sets = _check_init(init, (M, q), n)
    trace, history, prev_assign = [], [], None
    for s in range(schedule.sweeps):
        assign = np.argmin(set_dissimilarity(D, sets), axis=1)
        G = schedule.weights(lattice, s)
        costs = _candidate_costs(D, G[assign])
        new = np.vstack([_greedy_subset(costs[c], q) for c in range(M)])
        history.append(SweepRecord(schedule.radius(s), assign, sets.copy(), new.copy()))
        trace.append(float(sum(costs[c, new[c]].sum() / q for c in range(M))))
        done = stop_at_fixed_point and _is_fixed_point(schedule, s, sets, new, prev_assign, assign)
        sets, prev_assign = new, assign
        if done:
            break
    return QMedianMapState(sets, np.argmin(set_dissimilarity(D, sets), axis=1), trace, history)


def _greedy_subset(cost, q):
    chosen = []
    avail = np.ones(len(cost), dtype=bool)
    for _ in range(q):
        # incremental distortion of adding j is cost[j] / q
        j = int(np.argmin(np.where(avail, cost, np.inf)))
        chosen.append(j)
        avail[j] = False
    return np.array(chosen)


def kernel_sq_distances(K, coefficients) -> np.ndarray:
    """``(n, M)`` squared feature-space distances ``||phi(x_j) - p_c||^2``."""
    K = np.asarray(K)
    C = np.asarray(coefficients)
    cross = K @ C.T
    self_term = np.einsum("ci,ci->c", C @ K, C)
    return np.diag(K)[:, None] - 2 * cross + self_term[None, :]


def kernel_som_train(K, lattice: MapLattice, schedule: NeighborhoodSchedule | None = None,
                     seed=0) -> KernelMapState:
    """Batch kernel SOM with hard assignments.

    Prototype ``c`` is ``sum_i coefficients[c, i] phi(x_i)``; after each
    assignment step its coefficients become the normalised neighbourhood
    weights ``G(N(x_i), c) / sum_i' G(N(x_i'), c)``.
    """
    K = check_kernel_matrix(K)
    schedule = schedule or NeighborhoodSchedule.default_for(lattice)
    n, M = K.shape[0], lattice.n_neurons
    rng = np.random.default_rng(seed)
    C = np.zeros((M, n))
    C[np.arange(M), initial_indices(n, M, rng)] = 1.0
    energy, history = [], []
    for s in range(schedule.sweeps):
        d2 = kernel_sq_distances(K, C)
        bmu = np.argmin(d2, axis=1)
        G = schedule.weights(lattice, s)[bmu]
        energy.append(float((G * d2).sum() / n))
        history.append(bmu)
        den = G.sum(axis=0)
        live = den > 0
        C[live] = (G[:, live] / den[live]).T
    return KernelMapState(C, np.argmin(kernel_sq_distances(K, C), axis=1), energy, history)
