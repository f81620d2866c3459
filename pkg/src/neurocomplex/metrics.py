"""Dissimilarities and kernels: validation, edit distance, vector kernels,
graph heat kernel, Gram matrices and the kernel-induced distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NonPositiveKernelError

SYMMETRY_TOL = 1e-12


@dataclass
class Violation:
    rule: str
    i: int
    j: int

    def __str__(self):
        return f"{self.rule} violation at ({self.i}, {self.j})"


def validate_dissimilarity(D) -> list[Violation]:
    """Check symmetry, zero diagonal and nonnegativity.

    Returns one :class:`Violation` (the first offending pair) per broken rule;
    an empty list means the matrix is a valid dissimilarity. The triangle
    inequality is not required.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InputError(f"dissimilarity must be square, got shape {D.shape}")
    out = []
    checks = [
        ("symmetry", np.abs(D - D.T) > SYMMETRY_TOL),
        ("diagonal", np.diag(np.diag(D) != 0)),
        ("nonnegativity", D < 0),
    ]
    for rule, bad in checks:
        if bad.any():
            i, j = np.argwhere(bad)[0]
            out.append(Violation(rule, int(i), int(j)))
    return out


class DissimilarityMatrix(np.ndarray):
    """A validated ``n x n`` dissimilarity (an ndarray subclass)."""

    def __new__(cls, D):
        arr = np.array(D, dtype=float)
        bad = validate_dissimilarity(arr)
        if bad:
            raise InputError("invalid dissimilarity: " + "; ".join(map(str, bad)))
        return arr.view(cls)


def check_kernel_matrix(K, rel_tol=1e-8) -> np.ndarray:
    """Validate symmetry and positivity; returns ``K`` as a float array.

    Positivity is tested up to ``rel_tol * ||K||_2`` since exact PSD is not
    attainable in floating point.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"kernel matrix must be square, got shape {K.shape}")
    if np.any(np.abs(K - K.T) > SYMMETRY_TOL * max(1.0, np.abs(K).max(initial=0.0))):
        raise InputError("kernel matrix is not symmetric")
    ev = np.linalg.eigvalsh(K)
    norm = max(abs(ev[0]), abs(ev[-1])) if len(ev) else 0.0
    if len(ev) and ev[0] < -rel_tol * norm:
        raise NonPositiveKernelError(float(ev[0]))
    return K


def edit_distance(s, t) -> int:
    """Levenshtein distance with unit insert/delete/substitute costs."""
    s, t = list(s), list(t)
    if len(s) < len(t):
        s, t = t, s
    prev = list(range(len(t) + 1))
    for i, a in enumerate(s, start=1):
        cur = [i]
        for j, b in enumerate(t, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a != b)))
        prev = cur
    return prev[-1]


def edit_distance_matrix(strings) -> np.ndarray:
    n = len(strings)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = edit_distance(strings[i], strings[j])
    return D


def _pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def rbf_kernel(x, y, gamma=1.0) -> float:
    if not gamma > 0:
        raise InputError("gamma must be > 0")
    x, y = _pair(x, y)
    return float(np.exp(-gamma * np.sum((x - y) ** 2)))


def poly_kernel(x, y, degree=2, offset=0.0) -> float:
    x, y = _pair(x, y)
    return float((np.dot(x, y) + offset) ** degree)


def linear_kernel(x, y) -> float:
    x, y = _pair(x, y)
    return float(np.dot(x, y))


def graph_laplacian(adjacency) -> np.ndarray:
    A = np.asarray(adjacency, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("adjacency must be square")
    if not np.array_equal(A, A.T):
        i, j = np.argwhere(A != A.T)[0]
        raise InputError(f"adjacency is not symmetric at ({i}, {j})")
    if np.any(np.diag(A) != 0):
        raise InputError("adjacency must have a zero diagonal")
    return np.diag(A.sum(axis=1)) - A


def heat_kernel_matrix(adjacency, beta: float) -> np.ndarray:
    """``exp(-beta L)`` for the combinatorial Laplacian ``L = D - A``."""
    if beta < 0:
        raise InputError("beta must be >= 0")
    L = graph_laplacian(adjacency)
    if beta == 0:
        return np.eye(L.shape[0])
    ev, V = np.linalg.eigh(L)
    K = (V * np.exp(-beta * ev)) @ V.T
    return (K + K.T) / 2


def read_edge_list(path, n_nodes=None) -> np.ndarray:
    """Adjacency matrix from a text file of ``u v`` lines (0-indexed)."""
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise InputError(f"{path}:{lineno}: node ids must be integers") from None
            if u < 0 or v < 0:
                raise InputError(f"{path}:{lineno}: node ids must be >= 0")
            edges.append((u, v))
    n = n_nodes if n_nodes is not None else (max(max(e) for e in edges) + 1 if edges else 0)
    A = np.zeros((n, n))
    for u, v in edges:
        if u == v:
            raise InputError(f"self loop on node {u}")
        A[u, v] = A[v, u] = 1.0
    return A


def gram_matrix(objects, kernel) -> np.ndarray:
    """``K[i, j] = kernel(x_i, x_j)``, checked for symmetry and positivity."""
    n = len(objects)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            K[i, j] = K[j, i] = kernel(objects[i], objects[j])
    return check_kernel_matrix(K)


def kernel_distance(K, i: int, j: int) -> float:
    """``sqrt(K_ii + K_jj - 2 K_ij)``; radicands down to -1e-10 clamp to 0."""
    K = np.asarray(K)
    n = K.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise InputError(f"index out of range [0, {n})")
    if i == j:
        return 0.0
    rad = K[i, i] + K[j, j] - 2 * K[i, j]
    if rad < -1e-10:
        raise NonPositiveKernelError(rad, f"negative squared kernel distance {rad:.3e} at ({i}, {j})")
    return float(np.sqrt(max(rad, 0.0)))


def kernel_distance_matrix(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    d = np.diag(K)
    rad = d[:, None] + d[None, :] - 2 * K
    if rad.min() < -1e-10:
        i, j = np.unravel_index(np.argmin(rad), rad.shape)
        raise NonPositiveKernelError(rad[i, j], f"negative squared kernel distance at ({i}, {j})")
    out = np.sqrt(np.maximum(rad, 0.0))
    np.fill_diagonal(out, 0.0)
    return (out + out.T) / 2
