"""Two-scale forecasting: the slow-scale mean and spread are forecast by a
classical model, the fast-scale shape by a SOM over standardized profiles
indexed by metadata labels.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .som import MapLattice, NeighborhoodSchedule, SomResult, batch_som_train


@dataclass
class TwoScaleSeries:
    """``values[j, h]``: slow index j, fast index h; one metadata label per j."""

    values: np.ndarray
    metadata: list[str]

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        self.metadata = [str(m) for m in self.metadata]
        if len(self.metadata) != self.values.shape[0]:
            raise InputError(f"{self.values.shape[0]} rows but {len(self.metadata)} metadata labels")


@dataclass
class ProfileDecomposition:
    means: np.ndarray
    scales: np.ndarray
    profiles: np.ndarray
    degenerate: np.ndarray


def decompose_profiles(series: TwoScaleSeries | np.ndarray) -> ProfileDecomposition:
    """Centre and scale each row: ``q_j = (c_j - mu_j) / sigma_j`` (population variance).

    Rows with ``sigma_j = 0`` are flagged and get a zero profile.
    """
    c = series.values if isinstance(series, TwoScaleSeries) else np.atleast_2d(np.asarray(series, float))
    if c.shape[1] < 2:
        raise InputError("profiles need at least two fast-scale values")
    mu = c.mean(axis=1)
    centred = c - mu[:, None]
    sigma = np.sqrt(np.mean(centred ** 2, axis=1))
    degenerate = sigma == 0
    q = np.zeros_like(c)
    ok = ~degenerate
    q[ok] = centred[ok] / sigma[ok, None]
    return ProfileDecomposition(mu, sigma, q, degenerate)


@dataclass
class ProfileMap:
    prototypes: np.ndarray
    label_counts: list[Counter]
    assignment_counts: np.ndarray
    som: SomResult

    def to_dict(self):
        return {
            "prototypes": self.prototypes.tolist(),
            "metadata": [dict(sorted(c.items())) for c in self.label_counts],
            "assignmentCounts": self.assignment_counts.tolist(),
        }


def train_profile_som(decomp: ProfileDecomposition, metadata, lattice: MapLattice,
                      schedule: NeighborhoodSchedule | None = None, seed=0) -> ProfileMap:
    """SOM over the non-degenerate profiles; each neuron collects the labels
    of the profiles finally assigned to it."""
    ok = ~decomp.degenerate
    if not ok.any():
        raise InputError("every profile is degenerate (zero spread)")
    metadata = [str(m) for m in metadata]
    if len(metadata) != len(ok):
        raise InputError("one metadata label per row is required")
    som = batch_som_train(decomp.profiles[ok], lattice, schedule, seed)
    counts = [Counter() for _ in range(lattice.n_neurons)]
    for lab, c in zip(np.asarray(metadata, dtype=object)[ok], som.assignments):
        counts[c][lab] += 1
    n_assigned = np.bincount(som.assignments, minlength=lattice.n_neurons)
    return ProfileMap(som.prototypes, counts, n_assigned, som)


def predict_profile(label, pmap: ProfileMap) -> tuple[np.ndarray, bool]:
    """Weighted mean of the prototypes whose neuron has seen ``label``.

    Weights are the label counts. Unknown labels fall back to the mean of all
    prototypes weighted by assignment counts; the second return value flags
    the fallback.
    """
    P = np.asarray(pmap.prototypes)
    if P.size == 0 or pmap.assignment_counts.sum() == 0:
        raise InputError("empty map")
    w = np.array([c.get(str(label), 0) for c in pmap.label_counts], dtype=float)
    fallback = w.sum() == 0
    if fallback:
        w = pmap.assignment_counts.astype(float)
    return (w @ P) / w.sum(), bool(fallback)


def forecast_mean_var(means, scales, method: str = "seasonalNaive", period: int = 1,
                      order: int = 1) -> tuple[float, float]:
    """One-step forecast of the slow-scale mean and spread.

    ``seasonalNaive`` repeats the value ``period`` steps back; ``ar`` fits an
    AR(``order``) model with intercept by least squares on each history.
    """
    out = []
    for hist in (means, scales):
        h = np.asarray(hist, dtype=float).reshape(-1)
        if method == "seasonalNaive":
            if period < 1 or len(h) < period:
                raise InputError(f"seasonal naive needs at least {period} values")
            out.append(float(h[-period]))
        elif method == "ar":
            out.append(_ar_forecast(h, order))
        else:
            raise InputError(f"unknown forecasting method {method!r}")
    return out[0], max(out[1], 0.0)


def _ar_forecast(h, p):
    if p < 1 or len(h) < 2 * p + 1:
        raise InputError(f"AR({p}) needs at least {2 * p + 1} values")
    if np.all(h == h[0]):
        return float(h[0])
    rows = len(h) - p
    X = np.column_stack([np.ones(rows)] + [h[p - j - 1:len(h) - j - 1] for j in range(p)])
    coef, *_ = np.linalg.lstsq(X, h[p:], rcond=None)
    return float(coef[0] + coef[1:] @ h[::-1][:p])


@dataclass
class Forecast:
    values: np.ndarray
    mean: float
    scale: float
    profile: np.ndarray
    fallback: bool
    profile_map: ProfileMap

    def to_dict(self):
        return {
            "prediction": self.values.tolist(),
            "mean": self.mean,
            "scale": self.scale,
            "profile": self.profile.tolist(),
            "fallback": self.fallback,
        }


def forecast_next_vector(series: TwoScaleSeries, next_label, lattice: MapLattice,
                         schedule: NeighborhoodSchedule | None = None, method: str = "seasonalNaive",
                         period: int = 1, order: int = 1, seed=0) -> Forecast:
    """``mu_hat * 1 + sigma_hat * predicted profile`` for the next slow step."""
    dec = decompose_profiles(series)
    pmap = train_profile_som(dec, series.metadata, lattice, schedule, seed)
    mu, sigma = forecast_mean_var(dec.means, dec.scales, method, period, order)
    prof, fallback = predict_profile(next_label, pmap)
    return Forecast(mu + sigma * prof, mu, sigma, prof, fallback, pmap)
