"""Regenerate the small sample inputs in data/ (deterministic)."""

from pathlib import Path

import numpy as np

from neurocomplex.files import write_csv
from neurocomplex.hmm_mlp import HmmMlpParams, simulate
from neurocomplex.mlp import MlpParams

OUT = Path(__file__).resolve().parents[1] / "data"


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(0)

    X = np.vstack([rng.normal([-3, 0], 0.5, (50, 2)), rng.normal([3, 0], 0.5, (50, 2))])
    write_csv(OUT / "two_clusters.csv", ["x1", "x2"], X.round(6).tolist())

    D = np.sqrt(((X[:30, None] - X[None, :30]) ** 2).sum(-1)).round(6)
    write_csv(OUT / "dissimilarity.csv", None, D.tolist())
    (OUT / "words.txt").write_text("\n".join(
        ["kitten", "sitting", "mitten", "bitten", "knitting", "fitting", "sitter", "kitchen",
         "written", "smitten", "button", "mutton"]) + "\n")
    (OUT / "ring.edges").write_text("".join(f"{i} {(i + 1) % 10}\n" for i in range(10)))

    answers = []
    for _ in range(60):
        a = rng.choice(["yes", "no"])
        b = {"yes": "high", "no": "low"}[a] if rng.random() < 0.9 else rng.choice(["high", "low"])
        c = rng.choice(["north", "south", "east"])
        answers.append([a, b, c])
    write_csv(OUT / "survey.csv", ["owner", "income", "region"], answers)

    days = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"]
    h = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    rows = []
    for j in range(70):
        d = days[j % 7]
        shape = np.sin(h) if d not in ("sat", "sun") else np.cos(2 * h)
        level = 10 + 0.05 * j
        rows.append((level + 2 * shape + 0.1 * rng.standard_normal(24)).round(6).tolist() + [d])
    write_csv(OUT / "load.csv", None, rows)

    params = HmmMlpParams(
        [[0.95, 0.05], [0.1, 0.9]], [0.5, 0.5],
        [MlpParams([[0.8]], [0.0], [1.0], 2.0), MlpParams([[-0.8]], [0.0], [1.0], -2.0)],
        [0.3, 0.5],
    )
    y, _ = simulate(params, 300, [0.0], seed=1)
    write_csv(OUT / "regimes.csv", ["y"], [[v] for v in y.round(6)])
    from neurocomplex.files import write_json
    write_json(OUT / "hmm_model.json", params.to_dict())


if __name__ == "__main__":
    main()
