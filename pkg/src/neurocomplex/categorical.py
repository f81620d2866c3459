"""Categorical survey data: disjunctive (one-hot) and Burt encodings, the
chi-square row scaling of correspondence analysis, and a SOM on the scaled rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .som import MapLattice, NeighborhoodSchedule, SomResult, batch_som_train

log = logging.getLogger(__name__)


@dataclass
class CategoricalTable:
    """``n`` individuals by ``V`` variables of category labels.

    ``categories[v]`` lists the allowed labels of variable ``v`` in column
    order; when omitted it is inferred (sorted labels seen in the data).
    """

    values: list[list[str]]
    variables: list[str]
    categories: list[list[str]] | None = None

    def __post_init__(self):
        self.values = [list(map(str, row)) for row in self.values]
        V = len(self.variables)
        if V == 0:
            raise InputError("need at least one variable")
        for i, row in enumerate(self.values):
            if len(row) != V:
                raise InputError(f"row {i} has {len(row)} values, expected {V}")
        if self.categories is None:
            self.categories = [sorted({row[v] for row in self.values}) for v in range(V)]
        self.categories = [list(map(str, c)) for c in self.categories]
        if len(self.categories) != V or any(len(c) == 0 for c in self.categories):
            raise InputError("every variable needs a nonempty category dictionary")

    @property
    def labels(self) -> list[str]:
        return [f"{var}={cat}" for var, cats in zip(self.variables, self.categories) for cat in cats]


@dataclass
class EncodedTable:
    kind: str  # "cdt" or "burt"
    matrix: np.ndarray
    row_labels: list[str]
    column_labels: list[str]


def disjunctive_table(table: CategoricalTable) -> EncodedTable:
    """Complete disjunctive table: one 0/1 column per category."""
    offsets = np.cumsum([0] + [len(c) for c in table.categories])
    index = [{cat: k for k, cat in enumerate(cats)} for cats in table.categories]
    Z = np.zeros((len(table.values), offsets[-1]), dtype=int)
    for i, row in enumerate(table.values):
        for v, label in enumerate(row):
            try:
                Z[i, offsets[v] + index[v][label]] = 1
            except KeyError:
                raise InputError(
                    f"unknown label {label!r} at row {i}, variable {table.variables[v]!r}"
                ) from None
    return EncodedTable("cdt", Z, [str(i) for i in range(len(table.values))], table.labels)


def burt_table(table: CategoricalTable) -> EncodedTable:
    Z = disjunctive_table(table).matrix
    return EncodedTable("burt", Z.T @ Z, table.labels, table.labels)


def ca_transform(encoded: EncodedTable | np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Scale rows so Euclidean distance equals the chi-square profile distance.

    ``z_ij = t_ij / (r_i * sqrt(c_j / T))``. Columns with zero total are dropped;
    returns the transformed matrix and the indices of the kept columns.
    """
    t = np.asarray(encoded.matrix if isinstance(encoded, EncodedTable) else encoded, dtype=float)
    if t.ndim != 2 or t.size == 0:
        raise InputError("table must be a nonempty matrix")
    if np.any(t < 0):
        raise InputError("table entries must be nonnegative")
    r = t.sum(axis=1)
    if np.any(r == 0):
        raise InputError(f"row {int(np.argmin(r != 0))} is all zeros")
    c = t.sum(axis=0)
    keep = np.flatnonzero(c > 0)
    if len(keep) < t.shape[1]:
        log.warning("dropping %d empty column(s): %s", t.shape[1] - len(keep),
                    np.flatnonzero(c == 0).tolist())
    t, c = t[:, keep], c[keep]
    total = t.sum()
    return t / (r[:, None] * np.sqrt(c / total)[None, :]), keep.tolist()


def chi_square_distance(t, i, k) -> float:
    """Chi-square distance between row profiles ``i`` and ``k`` of a contingency table."""
    t = np.asarray(t, dtype=float)
    c = t.sum(axis=0)
    m = c > 0
    prof_i = t[i, m] / t[i].sum()
    prof_k = t[k, m] / t[k].sum()
    return float(np.sqrt(np.sum((prof_i - prof_k) ** 2 / (c[m] / t.sum()))))


@dataclass
class CategoricalMap:
    encoding: EncodedTable
    transformed: np.ndarray
    som: SomResult


def categorical_som_train(table: CategoricalTable, encoding: str, lattice: MapLattice,
                          schedule: NeighborhoodSchedule | None = None, seed=0) -> CategoricalMap:
    """Encode (``"burt"`` maps categories, ``"cdt"`` maps individuals), scale, train."""
    if encoding == "burt":
        enc = burt_table(table)
        used = np.flatnonzero(np.diag(enc.matrix) > 0)
        if len(used) < enc.matrix.shape[0]:
            log.warning("dropping %d unused categories", enc.matrix.shape[0] - len(used))
            labels = [enc.row_labels[i] for i in used]
            enc = EncodedTable("burt", enc.matrix[np.ix_(used, used)], labels, labels)
    elif encoding == "cdt":
        enc = disjunctive_table(table)
    else:
        raise InputError(f"unknown encoding {encoding!r}; expected 'burt' or 'cdt'")
    Z, _ = ca_transform(enc)
    return CategoricalMap(enc, Z, batch_som_train(Z, lattice, schedule, seed))
