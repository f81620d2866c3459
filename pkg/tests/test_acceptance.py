"""Acceptance criteria, each pinned to its stated tolerance and time budget.

Run with ``pytest tests/test_acceptance.py`` (add ``-s`` to also see the
per-test lines); the terminal summary lists one PASS/FAIL line per criterion.
"""

import itertools
import time

import numpy as np
import pytest
from scipy.stats import norm

from cli_cases import CASES, command_of
from neurocomplex.categorical import CategoricalTable, burt_table, ca_transform, disjunctive_table
from neurocomplex.cli import main
from neurocomplex.forecast import decompose_profiles
from neurocomplex.hmm_mlp import GemConfig, HmmMlpParams, forward_log_likelihood, gem_fit, simulate
from neurocomplex.metrics import edit_distance, heat_kernel_matrix, kernel_distance, poly_kernel
from neurocomplex.mlp import (MlpParams, TrainConfig, backprop_gradient, embed_autoregressive, mlp_forward,
                              mse_loss)
from neurocomplex.selection import PenaltySpec, select_hidden_units
from neurocomplex.som import (MapLattice, NeighborhoodSchedule, batch_som_train, map_quality,
                              segment_project_prototype)
from neurocomplex.som_variants import kernel_som_train, median_som_train


def report(record_property, text):
    print(text)
    record_property("detail", text)


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# -- 1 -----------------------------------------------------------------------

def five_point_gradient(params, X, y, h=1e-3):
    """Fourth-order central differences on the flattened parameters."""
    theta = params.flatten()
    k, p = params.hidden_count, params.input_dim
    g = np.empty_like(theta)

    def f(t):
        return mse_loss(MlpParams.from_flat(t, k, p, params.transfer), (X, y))

    for j in range(len(theta)):
        e = np.zeros_like(theta)
        e[j] = h
        g[j] = (-f(theta + 2 * e) + 8 * f(theta + e) - 8 * f(theta - e) + f(theta - 2 * e)) / (12 * h)
    return g


@pytest.mark.criterion(1, "backprop gradient vs finite differences, rel err < 1e-5")
def test_c01_gradient_oracle(record_property):
    rng = np.random.default_rng(2024)
    worst = 0.0
    with Clock() as c:
        for i in range(100):
            k, p = int(rng.integers(1, 6)), int(rng.integers(1, 5))
            m = MlpParams(rng.normal(size=(k, p)), rng.normal(size=k), rng.normal(size=k), rng.normal(),
                          "tanh" if i % 2 else "logistic")
            X = rng.normal(size=(20, p))
            y = rng.normal(size=20)
            g = backprop_gradient(m, (X, y))
            fd = five_point_gradient(m, X, y)
            worst = max(worst, float(np.max(np.abs(g - fd) / np.maximum(np.abs(g), np.abs(fd)))))
    report(record_property, f"max componentwise rel err {worst:.2e}, {c.elapsed:.2f}s")
    assert worst < 1e-5
    assert c.elapsed < 10


# -- 2 -----------------------------------------------------------------------

TRUE_K2 = MlpParams([[2.0, 0.5], [-1.0, 2.0]], [0.5, -0.5], [1.5, -1.0], 0.2)


def k2_data(seed, n=1000):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, size=(n, 2))
    return X, mlp_forward(TRUE_K2, X) + 0.1 * rng.standard_normal(n)


@pytest.mark.slow
@pytest.mark.criterion(2, "selection recovers k=2 with logOverN in >= 16/20 trials")
def test_c02_selection_recovery(record_property):
    chosen = []
    with Clock() as c:
        for trial in range(20):
            trace, _ = select_hidden_units(k2_data(trial), 5, PenaltySpec("logOverN"), TrainConfig(), seed=trial)
            chosen.append(trace.chosen_k)
    hits = sum(k == 2 for k in chosen)
    report(record_property, f"{hits}/20 chose k=2, chosen={chosen}, {c.elapsed:.1f}s")
    assert hits >= 16
    assert c.elapsed < 300


# -- 3 -----------------------------------------------------------------------

@pytest.mark.criterion(3, "forward log-likelihood vs enumeration of all paths, rel diff < 1e-10")
def test_c03_forward_enumeration(record_property):
    P = HmmMlpParams([[0.8, 0.2], [0.3, 0.7]], [0.4, 0.6],
                     [MlpParams([[0.9]], [0.1], [1.2], 0.5), MlpParams([[-0.7]], [0.0], [0.8], -0.3)],
                     [0.4, 0.9])
    warm = [0.2]
    y, _ = simulate(P, 6, warm, seed=11)
    with Clock() as c:
        ll = forward_log_likelihood(P, y, warm)
        X, _ = embed_autoregressive(np.concatenate([warm, y]), 1)
        dens = np.array([[norm.pdf(y[t], mlp_forward(P.regressors[s], X[t]), P.noise_scales[s])
                          for s in range(2)] for t in range(6)])
        total = 0.0
        for path in itertools.product(range(2), repeat=6):
            pr = P.initial[path[0]] * dens[0, path[0]]
            for t in range(1, 6):
                pr *= P.transition[path[t - 1], path[t]] * dens[t, path[t]]
            total += pr
        rel = abs(ll - np.log(total)) / abs(np.log(total))
    report(record_property, f"rel diff {rel:.2e}, {c.elapsed:.3f}s")
    assert rel < 1e-10
    assert c.elapsed < 1


# -- 4 -----------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.criterion(4, "GEM log-likelihood nondecreasing (tol -1e-8) over 50 iterations, 10 runs")
def test_c04_gem_monotone(record_property):
    P = HmmMlpParams([[0.95, 0.05], [0.1, 0.9]], [0.5, 0.5],
                     [MlpParams([[0.8]], [0.0], [1.0], 2.0), MlpParams([[-0.8]], [0.0], [1.0], -2.0)],
                     [0.3, 0.5])
    worst = np.inf
    with Clock() as c:
        for run in range(10):
            y, _ = simulate(P, 200, [0.0], seed=100 + run)
            _, trace = gem_fit(y, 2, 1, GemConfig(iterations=50), seed=run)
            assert len(trace) >= 50
            worst = min(worst, float(np.min(np.diff(trace))))
    report(record_property, f"smallest step {worst:.2e}, {c.elapsed:.1f}s")
    assert worst >= -1e-8
    assert c.elapsed < 120


# -- 5 -----------------------------------------------------------------------

@pytest.mark.criterion(5, "median SOM updates optimal against exhaustive scan, zero violations")
def test_c05_median_optimality(record_property):
    lat = MapLattice.grid(3, 3)
    sched = NeighborhoodSchedule("gaussian", 1.5, 0.5, 10)
    violations, checks = 0, 0
    with Clock() as c:
        for inst in range(5):
            X = np.random.default_rng(inst).normal(size=(60, 3))
            D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
            D = (D + D.T) / 2
            st = median_som_train(D, lat, sched, seed=inst, stop_at_fixed_point=False)
            for s, rec in enumerate(st.history):
                G = sched.weights(lat, s)
                for cn in range(9):
                    w = np.array([G[rec.assignments[i], cn] for i in range(60)])
                    scan = [float(np.dot(w, D[:, cand])) for cand in range(60)]
                    checks += 1
                    violations += scan[rec.after[cn]] > min(scan)
    report(record_property, f"{violations} violations in {checks} updates, {c.elapsed:.2f}s")
    assert violations == 0
    assert c.elapsed < 30


# -- 6 -----------------------------------------------------------------------

@pytest.mark.criterion(6, "linear-kernel SOM reproduces batch SOM, prototypes within 1e-8")
def test_c06_kernel_equivalence(record_property):
    lat = MapLattice.grid(3, 3)
    sched = NeighborhoodSchedule.default_for(lat, sweeps=20)
    worst, same = 0.0, True
    with Clock() as c:
        for seed in range(5):
            X = np.random.default_rng(seed).normal(size=(200, 2))
            b = batch_som_train(X, lat, sched, seed=seed)
            k = kernel_som_train(X @ X.T, lat, sched, seed=seed)
            same &= np.array_equal(b.assignments, k.assignments)
            same &= all(np.array_equal(u, v) for u, v in zip(b.history, k.history))
            worst = max(worst, float(np.max(np.abs(k.coefficients @ X - b.prototypes))))
    report(record_property, f"assignments identical={bool(same)}, max prototype diff {worst:.1e}, {c.elapsed:.2f}s")
    assert same and worst < 1e-8
    assert c.elapsed < 30


# -- 7 -----------------------------------------------------------------------

def quad_features(x, c):
    """Explicit map with <phi(x), phi(y)> = (x.y + c)^2."""
    x = np.asarray(x)
    return np.concatenate([np.outer(x, x).ravel(), np.sqrt(2 * c) * x, [c]])


@pytest.mark.criterion(7, "degree-2 kernel distance vs explicit feature map, < 1e-10")
def test_c07_feature_map(record_property):
    rng = np.random.default_rng(7)
    worst = 0.0
    with Clock() as clk:
        for _ in range(50):
            d = int(rng.integers(1, 6))
            x, y = rng.normal(size=d), rng.normal(size=d)
            c = float(rng.uniform(0, 2))
            K = np.array([[poly_kernel(a, b, 2, c) for b in (x, y)] for a in (x, y)])
            explicit = np.linalg.norm(quad_features(x, c) - quad_features(y, c))
            worst = max(worst, abs(kernel_distance(K, 0, 1) - explicit))
    report(record_property, f"max abs diff {worst:.1e}, {clk.elapsed:.3f}s")
    assert worst < 1e-10
    assert clk.elapsed < 1


# -- 8 -----------------------------------------------------------------------

@pytest.mark.criterion(8, "profile mean/variance within 1e-12 and reconstruction within 1e-10")
def test_c08_profile_identity(record_property):
    rng = np.random.default_rng(8)
    rows = rng.normal(rng.uniform(-50, 50, size=(1000, 1)), rng.uniform(0.1, 10, size=(1000, 1)),
                      size=(1000, 24))
    with Clock() as c:
        d = decompose_profiles(rows)
        m = np.max(np.abs(d.profiles.mean(axis=1)))
        v = np.max(np.abs(d.profiles.var(axis=1) - 1))
        r = np.max(np.abs(d.means[:, None] + d.scales[:, None] * d.profiles - rows))
    report(record_property, f"mean {m:.1e}, var {v:.1e}, reconstruction {r:.1e}, {c.elapsed:.3f}s")
    assert m < 1e-12 and v < 1e-12 and r < 1e-10
    assert c.elapsed < 1


# -- 9 -----------------------------------------------------------------------

def chi2_loop(t, i, k):
    total = sum(map(sum, t))
    col = [sum(row[j] for row in t) for j in range(len(t[0]))]
    ri, rk = sum(t[i]), sum(t[k])
    return sum((t[i][j] / ri - t[k][j] / rk) ** 2 / (col[j] / total) for j in range(len(col))) ** 0.5


@pytest.mark.criterion(9, "Burt = CDT^T CDT exactly on 200 tables; CA chi-square within 1e-10")
def test_c09_burt_identity(record_property):
    rng = np.random.default_rng(9)
    burt_ok, worst = 0, 0.0
    with Clock() as c:
        for _ in range(200):
            V = int(rng.integers(1, 6))
            n = int(rng.integers(1, 51))
            cats = [[f"c{j}" for j in range(int(rng.integers(1, 5)))] for _ in range(V)]
            rows = [[cats[v][rng.integers(len(cats[v]))] for v in range(V)] for _ in range(n)]
            t = CategoricalTable(rows, [f"v{v}" for v in range(V)], cats)
            Z = disjunctive_table(t).matrix
            burt_ok += np.array_equal(burt_table(t).matrix, Z.T @ Z)
        for _ in range(50):
            T = rng.integers(1, 10, size=(int(rng.integers(2, 8)), int(rng.integers(2, 6))))
            Zc, _ = ca_transform(T)
            for i, k in itertools.combinations(range(T.shape[0]), 2):
                worst = max(worst, abs(np.linalg.norm(Zc[i] - Zc[k]) - chi2_loop(T.tolist(), i, k)))
    report(record_property, f"{burt_ok}/200 exact, chi-square max diff {worst:.1e}, {c.elapsed:.2f}s")
    assert burt_ok == 200 and worst < 1e-10
    assert c.elapsed < 10


# -- 10 ----------------------------------------------------------------------

@pytest.mark.criterion(10, "heat kernel: beta=0 identity, 2-node closed form 1e-12, min eig >= -1e-10")
def test_c10_heat_kernel(record_property):
    rng = np.random.default_rng(10)
    with Clock() as c:
        A = (rng.random((6, 6)) < 0.5).astype(float)
        A = np.triu(A, 1) + np.triu(A, 1).T
        ident = np.array_equal(heat_kernel_matrix(A, 0.0), np.eye(6))
        two = 0.0
        for beta in (0.1, 0.7, 2.0, 5.0):
            e = np.exp(-2 * beta)
            want = 0.5 * np.array([[1 + e, 1 - e], [1 - e, 1 + e]])
            two = max(two, float(np.max(np.abs(heat_kernel_matrix([[0, 1], [1, 0]], beta) - want))))
        low = np.inf
        for _ in range(20):
            n = int(rng.integers(2, 16))
            W = np.triu(rng.random((n, n)) * (rng.random((n, n)) < 0.4), 1)
            low = min(low, float(np.linalg.eigvalsh(heat_kernel_matrix(W + W.T, rng.uniform(0, 3))).min()))
    report(record_property, f"identity={ident}, 2-node diff {two:.1e}, min eig {low:.2e}, {c.elapsed:.3f}s")
    assert ident and two < 1e-12 and low >= -1e-10
    assert c.elapsed < 5


# -- 11 ----------------------------------------------------------------------

@pytest.mark.criterion(11, "edit distance: metric axioms and kitten/sitting = 3")
def test_c11_edit_distance(record_property):
    rng = np.random.default_rng(11)

    def word():
        return "".join(rng.choice(list("abc"), size=int(rng.integers(0, 9))))

    bad = 0
    with Clock() as c:
        for _ in range(1000):
            x, y, z = word(), word(), word()
            dxy, dyx = edit_distance(x, y), edit_distance(y, x)
            bad += dxy != dyx or edit_distance(x, x) != 0 or (dxy == 0) != (x == y)
            bad += edit_distance(x, z) > dxy + edit_distance(y, z)
        ks = edit_distance("kitten", "sitting")
    report(record_property, f"{bad} axiom failures over 1000 triples, kitten/sitting={ks}, {c.elapsed:.3f}s")
    assert bad == 0 and ks == 3
    assert c.elapsed < 1


# -- 12 ----------------------------------------------------------------------

@pytest.mark.criterion(12, "grid(5,5) on 500 uniform points: topographic error < 0.2 in >= 9/10 seeds")
def test_c12_topographic(record_property):
    lat = MapLattice.grid(5, 5)
    errs = []
    with Clock() as c:
        for seed in range(10):
            X = np.random.default_rng(seed).uniform(size=(500, 2))
            res = batch_som_train(X, lat, seed=seed)
            errs.append(map_quality(X, res.prototypes, lat)[1])
    good = sum(e < 0.2 for e in errs)
    report(record_property, f"{good}/10 below 0.2, max {max(errs):.3f}, {c.elapsed:.2f}s")
    assert good >= 9
    assert c.elapsed < 60


# -- 13 ----------------------------------------------------------------------

def exhaustive_segmentation(x, S):
    H = len(x)
    best = (np.inf, None)
    for cuts in itertools.combinations(range(1, H), S - 1):
        bounds = (0, *cuts, H)
        err = sum(float(((x[a:b] - x[a:b].mean()) ** 2).sum()) for a, b in zip(bounds[:-1], bounds[1:]))
        if err < best[0]:
            best = (err, list(cuts))
    return best


@pytest.mark.criterion(13, "segmentation DP matches exhaustive search, H=10, S<=3")
def test_c13_segmentation(record_property):
    rng = np.random.default_rng(13)
    mismatches, worst = 0, 0.0
    with Clock() as c:
        for _ in range(50):
            x = rng.normal(size=10)
            for S in (1, 2, 3):
                _, cuts, err = segment_project_prototype(x, S)
                ex_err, ex_cuts = exhaustive_segmentation(x, S)
                mismatches += cuts != ex_cuts
                worst = max(worst, abs(err - ex_err))
    # "exact" here means identical breakpoints; the errors agree to floating-point rounding
    report(record_property, f"{mismatches} breakpoint mismatches, max error diff {worst:.1e}, {c.elapsed:.2f}s")
    assert mismatches == 0 and worst < 1e-12
    assert c.elapsed < 5


# -- 14 ----------------------------------------------------------------------

@pytest.mark.criterion(14, "every CLI command re-run from resolved config gives byte-identical JSON")
def test_c14_cli_determinism(tmp_path, record_property):
    differing = []
    for case, sets in sorted(CASES.items()):
        cmd = command_of(case)
        a, b = tmp_path / case / "a", tmp_path / case / "b"
        argv = [cmd, "--out", str(a)]
        for s in sets:
            argv += ["--set", s]
        assert main(argv) == 0, case
        assert main([cmd, "--config", str(a / "config.resolved"), "--out", str(b)]) == 0, case
        jsons = sorted(p.name for p in a.glob("*.json"))
        assert jsons, case
        differing += [f"{case}/{n}" for n in jsons if (a / n).read_bytes() != (b / n).read_bytes()]
    report(record_property, f"{len(CASES)} runs, differing artifacts: {differing or 'none'}")
    assert not differing
