"""Smoke test for the scgid extension module.

Build and run from the repository root:

    cargo build -p scgid-python --features extension-module --release
    cp target/release/libscgid_python.so python/scgid.so
    python3 python/smoke_test.py
"""

import pathlib
import sys

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

import scgid  # noqa: E402

FIXTURES = HERE.parent / "fixtures"


def load_graph(name):
    return scgid.SummaryGraph.from_json((FIXTURES / "graphs" / f"{name}.json").read_text())


def load_model(name):
    return scgid.Model.from_json((FIXTURES / "models" / f"{name}.json").read_text())


def main():
    g = load_graph("fig5c")
    cde = g.check_cde("X", "Y", lag=1)
    nde = g.check_nde("X", "Y", lag=1)
    assert cde.identifiable and nde.identifiable, (cde, nde)
    assert nde.estimand is not None

    r = load_graph("fig3a").check_nde("X", "Y", lag=1)
    assert r.status == "UNKNOWN"
    assert any(i == 2 and not ok for i, ok, _ in r.conditions), r.conditions

    r = load_graph("fig1a").check_cde("X", "Y", lag=1, assume_no_hidden_confounding=True)
    assert r.status == "NOT_IDENTIFIABLE_BY_ADJUSTMENT"
    assert r.cycle == ["Y", "W", "Y"]

    built = scgid.SummaryGraph(1, ["X", "Y"], [("X", "Y")])
    assert built.possible_parents("Y", 2) == ["X@1", "X@2"], built.possible_parents("Y", 2)

    assert load_graph("fig3a").oracle_cde("Y", window=3).holds
    bad = load_graph("fig1a").oracle_cde("Y", window=3)
    assert not bad.holds and bad.counterexample is not None

    try:
        load_graph("fig1a").oracle_cde("Y", window=3, strategy="exhaustive", cap=10)
    except RuntimeError:
        pass
    else:
        raise AssertionError("cap was not enforced")

    m = load_model("fig5c_linear")
    rows = m.sample(5, seed=3)
    assert len(rows) == 5 and len(rows[0]) == len(m.columns)
    assert rows == m.sample(5, seed=3)
    est, se = m.true_nde("X", 1, "Y", 2, n=1000)
    assert abs(est - 0.8) < 1e-9, est

    assert load_model("binary_mediation").exact_nde("X", 0, "Y", 0) == "83/200"

    try:
        scgid.SummaryGraph.from_json("{")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed JSON accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
