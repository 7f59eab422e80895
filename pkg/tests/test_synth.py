import pytest

from hfbench.classify import fairness_report, group_confusion
from hfbench.exceptions import DegenerateSpec
from hfbench.synth import GroupSpec, generate_classification, generate_landmark, oracle_report


def test_counts_match_requested_rates():
    recs = generate_classification([GroupSpec("a", 100, 100, 0.8, 0.1), GroupSpec("b", 100, 100, 0.6, 0.3)], seed=0)
    conf = group_confusion(recs)
    assert (conf["a"].tp, conf["a"].fp) == (80, 10)
    assert (conf["b"].tp, conf["b"].fp) == (60, 30)
    assert fairness_report(recs).deo == 20.0


def test_rates_round_half_up():
    assert GroupSpec("a", 10, 10, 0.25, 0.35).counts() == (3, 7, 4, 6)


def test_seed_is_deterministic():
    specs = [GroupSpec("a", 5, 5, 0.4, 0.2), GroupSpec("b", 5, 5, 0.6, 0.4)]
    assert generate_classification(specs, 7) == generate_classification(specs, 7)
    assert generate_classification(specs, 7) != generate_classification(specs, 8)


def test_degenerate_specs():
    with pytest.raises(DegenerateSpec):
        generate_classification([], 0)
    with pytest.raises(DegenerateSpec):
        generate_classification([GroupSpec("a", 0, 0, 0.5, 0.5)], 0)
    with pytest.raises(DegenerateSpec):
        generate_classification([GroupSpec("a", 3, 3, 1.5, 0.5)], 0)
    with pytest.raises(DegenerateSpec):
        generate_landmark({"a": 1}, 5, {"b": 1.0}, 0)


def test_oracle_agrees_on_fixture(sixteen):
    assert oracle_report(sixteen) == fairness_report(sixteen)


def test_landmark_generator_shapes():
    recs = generate_landmark({"a": 2, "b": 3}, 68, {"a": 1.0, "b": 0.0}, seed=2)
    assert len(recs) == 5 and all(r.k == 68 for r in recs)
    assert [r.group for r in recs] == ["a", "a", "b", "b", "b"]
    assert recs[-1].pred == recs[-1].gt
