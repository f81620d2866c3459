import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from neurocomplex.errors import DivergedTrainingError, InputError
from neurocomplex.mlp import MlpParams, mlp_forward
from neurocomplex.selection import (PenaltySpec, bic_score, parameter_scaled_penalty, penalty_value,
                                    select_hidden_units)


def stub_trainer(losses, diverge_at=None):
    calls = []

    def trainer(pairs, k, config, seed):
        calls.append((k, tuple(seed)))
        if k == diverge_at:
            raise DivergedTrainingError(0)
        X, _ = pairs
        return MlpParams(np.zeros((k, X.shape[1])), np.zeros(k), np.zeros(k), 0.0), losses[k - 1]

    trainer.calls = calls
    return trainer


PAIRS = (np.zeros((10, 1)), np.zeros(10))


def test_penalty_values():
    for kind in ("logOverN", "sqrtOverN"):
        assert penalty_value(PenaltySpec(kind), 0.0, 50) == 0.0
    assert penalty_value(PenaltySpec("logOverN"), 1.0, 100) == pytest.approx(0.0460517018598809, abs=1e-15)
    assert penalty_value(PenaltySpec("sqrtOverN"), 1.0, 100) == pytest.approx(0.1, abs=1e-15)
    assert penalty_value(PenaltySpec("sqrtOverN", 3.0), 1.0, 100) == pytest.approx(0.3)
    custom = PenaltySpec("custom", fn=parameter_scaled_penalty)
    assert penalty_value(custom, 1.0, 100, k=2, m=9) == pytest.approx(9 * math.log(100) / 100)
    with pytest.raises(InputError):
        penalty_value(PenaltySpec(), 1.0, 1)
    with pytest.raises(InputError):
        PenaltySpec(multiplier=0)


@given(st.floats(0, 1e6), st.integers(2, 10**7))
def test_sqrt_penalty_dominates_log(e_n, n):
    assert penalty_value(PenaltySpec("sqrtOverN"), e_n, n) >= penalty_value(PenaltySpec("logOverN"), e_n, n)


def test_bic_examples():
    assert bic_score(1.0, 7, 100) == pytest.approx(7 * math.log(100))
    assert bic_score(0.25, 7, 100) == pytest.approx(-106.39, abs=5e-3)
    assert bic_score(0.25, 7, 100) == pytest.approx(100 * math.log(0.25) + 7 * math.log(100), rel=1e-15)
    assert bic_score(0.3, 14, 50) - bic_score(0.3, 7, 50) == pytest.approx(7 * math.log(50))
    with pytest.raises(InputError):
        bic_score(0.0, 3, 10)


def test_selection_stops_at_first_increase():
    trace, model = select_hidden_units(PAIRS, 5, trainer=stub_trainer([0.50, 0.40, 0.45, 0.1, 0.1]))
    assert trace.chosen_k == 2
    assert [r.k for r in trace.rows] == [1, 2, 3]
    assert model.hidden_count == 2


def test_selection_runs_to_max_k_and_continues_on_ties():
    trace, _ = select_hidden_units(PAIRS, 4, trainer=stub_trainer([0.5, 0.4, 0.4, 0.3]))
    assert trace.chosen_k == 4
    assert len(trace.rows) == 4


def test_selection_trace_consistency_and_seeding():
    tr = stub_trainer([0.9, 0.7, 0.8])
    trace, _ = select_hidden_units(PAIRS, 3, PenaltySpec("sqrtOverN"), seed=42, trainer=tr)
    for r in trace.rows:
        assert r.t_n == r.e_n + r.penalty
    assert tr.calls == [(1, (42, 1)), (2, (42, 2)), (3, (42, 3))]


def test_selection_diverged_k_aborts():
    with pytest.raises(DivergedTrainingError, match="k=2"):
        select_hidden_units(PAIRS, 3, trainer=stub_trainer([0.5, 0.4, 0.3], diverge_at=2))


def test_trace_exports():
    trace, _ = select_hidden_units(PAIRS, 3, trainer=stub_trainer([0.5, 0.4, 0.45]))
    lines = trace.to_csv().splitlines()
    assert lines[0] == "k,E_n,penalty,T_n" and len(lines) == 4
    doc = json.loads(json.dumps(trace.to_dict()))
    assert doc["chosenK"] == 2 and len(doc["perK"]) == 3


def test_selection_real_training_small():
    rng = np.random.default_rng(0)
    true = MlpParams([[2.0, 0.5], [-1.0, 2.0]], [0.5, -0.5], [1.5, -1.0], 0.2)
    X = rng.uniform(-2, 2, size=(300, 2))
    y = mlp_forward(true, X) + 0.1 * rng.standard_normal(300)
    pen = PenaltySpec("custom", fn=parameter_scaled_penalty)
    trace, model = select_hidden_units((X, y), 4, pen, seed=0)
    assert trace.chosen_k == 2
    assert trace.rows[1].e_n < 0.02
