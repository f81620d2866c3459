"""Penalized choice of the number of hidden units.

``T_n(k) = E_n(theta_k) + a_n(k, theta_k)`` is evaluated for k = 1, 2, ...
and the search stops at the first strict increase. Weight pruning after the
search is not performed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivergedTrainingError, InputError
from .mlp import MlpParams, TrainConfig, as_arrays, parameter_count, train_mlp

PENALTY_KINDS = ("logOverN", "sqrtOverN", "custom")


@dataclass
class PenaltySpec:
    """Penalty ``a_n``.

    ``custom`` requires ``fn(E_n, n, k, m)`` returning the raw penalty, which is
    then scaled by ``multiplier``.
    """

    kind: str = "logOverN"
    multiplier: float = 1.0
    fn: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise InputError(f"unknown penalty kind {self.kind!r}")
        if not self.multiplier > 0:
            raise InputError("penalty multiplier must be > 0")
        if self.kind == "custom" and self.fn is None:
            raise InputError("custom penalty needs a function")


def penalty_value(spec: PenaltySpec, e_n: float, n: int, k: int = 1, m: int | None = None) -> float:
    if n < 2:
        raise InputError("penalty needs n >= 2")
    if e_n < 0:
        raise InputError("E_n must be >= 0")
    if spec.kind == "logOverN":
        raw = e_n * math.log(n) / n
    elif spec.kind == "sqrtOverN":
        raw = e_n * math.sqrt(n) / n
    else:
        raw = float(spec.fn(e_n, n, k, m))
    return spec.multiplier * raw


def parameter_scaled_penalty(e_n, n, k, m):
    """``E_n * m * log(n) / n``: the log penalty multiplied by the parameter count."""
    return e_n * m * math.log(n) / n


def bic_score(e_n: float, m: int, n: int) -> float:
    """Gaussian-noise BIC: ``n ln(E_n) + m ln(n)``."""
    if not e_n > 0:
        raise InputError("BIC needs E_n > 0 (a perfect fit has no finite score)")
    if m < 1 or n < 2:
        raise InputError("BIC needs m >= 1 and n >= 2")
    return n * math.log(e_n) + m * math.log(n)


@dataclass
class TraceRow:
    k: int
    e_n: float
    penalty: float
    t_n: float


@dataclass
class SelectionTrace:
    rows: list[TraceRow]
    chosen_k: int
    note: str = "weight pruning not performed"

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["k", "E_n", "penalty", "T_n"])
        for r in self.rows:
            wr.writerow([r.k, repr(r.e_n), repr(r.penalty), repr(r.t_n)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "chosenK": self.chosen_k,
            "note": self.note,
            "perK": [{"k": r.k, "E_n": r.e_n, "penalty": r.penalty, "T_n": r.t_n} for r in self.rows],
        }


def select_hidden_units(pairs, max_k: int, penalty: PenaltySpec | None = None,
                        train_config: TrainConfig | None = None, seed: int = 0,
                        trainer=train_mlp) -> tuple[SelectionTrace, MlpParams]:
    """Grow k from 1 while ``T_n(k+1) <= T_n(k)``.

    Each k is trained from fresh restarts seeded by ``(seed, k)``. ``trainer``
    has the signature of :func:`train_mlp` and may be replaced for testing.
    """
    if max_k < 1:
        raise InputError("max_k must be >= 1")
    penalty = penalty or PenaltySpec()
    X, y = as_arrays(pairs)
    n, p = X.shape

    rows, models = [], {}
    for k in range(1, max_k + 1):
        try:
            params, e_n = trainer((X, y), k, train_config, seed=[seed, k])
        except DivergedTrainingError as err:
            raise DivergedTrainingError(err.restart, f"every restart diverged at k={k}") from err
        pen = penalty_value(penalty, e_n, n, k, parameter_count(k, p))
        rows.append(TraceRow(k, float(e_n), float(pen), float(e_n) + float(pen)))
        models[k] = params
        if k > 1 and rows[-1].t_n > rows[-2].t_n:
            chosen = k - 1
            break
    else:
        chosen = rows[-1].k
    return SelectionTrace(rows, chosen), models[chosen]
