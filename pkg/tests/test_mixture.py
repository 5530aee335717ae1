import math

import numpy as np
import pytest

from conftest import random_dataset, random_model, schema_of_length
from oracles import naive_joint_ll
from rulemix.binarizer import BinaryDataset, SplitSchema
from rulemix.mixture import (
    MixtureModel,
    extract_rules,
    joint_log_likelihood,
    render_rules_text,
    rule_text,
    rules_to_json_dict,
)


def uniform_gate_model(k=3, l=2, mu=None, lam=None, schema=None):
    schema = schema or schema_of_length(l)
    return MixtureModel(
        gate_weights=np.zeros((k, l + 1)),
        eta=np.full((k, l), 0.5),
        mu=np.zeros(k) if mu is None else np.asarray(mu, dtype=float),
        lam=np.ones(k) if lam is None else np.asarray(lam, dtype=float),
        schema=schema,
    )


def test_gate_uniform_when_weights_zero():
    model = uniform_gate_model(k=4)
    assert np.allclose(model.gate([1.0, 0.0]), 0.25, atol=1e-15)


def test_gate_log3_margin_gives_three_to_one():
    schema = schema_of_length(1)
    w = np.array([[0.0, math.log(3.0)], [0.0, 0.0]])
    model = MixtureModel(w, np.full((2, 1), 0.5), np.zeros(2), np.ones(2), schema)
    assert np.allclose(model.gate([0.0]), [0.75, 0.25], atol=1e-12)


def test_gate_shift_invariance():
    schema = schema_of_length(3)
    rng = np.random.default_rng(0)
    w = rng.normal(size=(3, 4))
    shift = rng.normal(size=4)
    m1 = MixtureModel(w, np.full((3, 3), 0.5), np.zeros(3), np.ones(3), schema)
    m2 = MixtureModel(w + shift, np.full((3, 3), 0.5), np.zeros(3), np.ones(3), schema)
    s = np.array([1.0, 0.0, 1.0])
    assert np.allclose(m1.gate(s), m2.gate(s), atol=1e-12)
    assert m1.predict_point(s) == m2.predict_point(s)


def test_gate_outputs_on_simplex():
    rng = np.random.default_rng(1)
    schema = schema_of_length(5)
    for _ in range(1000):
        model = random_model(int(rng.integers(1e9)), k=3, schema=schema)
        s = rng.integers(0, 2, size=5).astype(float)
        g = model.gate(s)
        assert g.min() > 0.0
        assert abs(g.sum() - 1.0) <= 1e-12


def test_density_half_eta_is_l_log_two():
    model = uniform_gate_model(k=2, l=4, lam=[2.0, 2.0])
    gauss = 0.5 * math.log(2.0 / (2 * math.pi))
    got = model.component_log_density(0, [1, 0, 1, 1], 0.0)
    assert got == pytest.approx(-4 * math.log(2.0) + gauss, abs=1e-12)


def test_density_at_mean_is_half_log_lam_over_two_pi():
    model = uniform_gate_model(k=1, l=1, mu=[1.5], lam=[3.0])
    got = model.component_log_density(0, [1.0], 1.5)
    assert got == pytest.approx(-math.log(2.0) + 0.5 * math.log(3.0 / (2 * math.pi)), abs=1e-12)


def test_density_clamps_hard_eta():
    schema = schema_of_length(2)
    model = MixtureModel(
        np.zeros((1, 3)), np.array([[1.0, 0.0]]), np.zeros(1), np.ones(1), schema
    )
    gauss = 0.5 * math.log(1.0 / (2 * math.pi))
    got = model.component_log_density(0, [1.0, 0.0], 0.0)
    assert got - gauss == pytest.approx(2 * math.log(1 - 1e-6), abs=1e-15)
    assert math.isfinite(model.component_log_density(0, [0.0, 1.0], 0.0))


def test_density_component_index_checked():
    model = uniform_gate_model(k=2)
    with pytest.raises(IndexError):
        model.component_log_density(2, [1.0, 0.0], 0.0)


def test_joint_ll_single_component_is_density_sum():
    ds = random_dataset(2, n=12, l=3)
    model = random_model(3, k=1, schema=ds.schema)
    expected = sum(
        model.component_log_density(0, ds.bits[i], ds.z[i]) for i in range(len(ds))
    )
    assert joint_log_likelihood(model, ds) == pytest.approx(expected, abs=1e-9)


def test_joint_ll_additive_under_duplication():
    ds = random_dataset(4, n=10, l=3)
    doubled = BinaryDataset(
        np.concatenate([ds.xs, ds.xs]),
        np.concatenate([ds.bits, ds.bits]),
        np.concatenate([ds.z, ds.z]),
        ds.schema,
    )
    model = random_model(5, k=3, schema=ds.schema)
    assert joint_log_likelihood(model, doubled) == pytest.approx(
        2.0 * joint_log_likelihood(model, ds), rel=1e-12
    )


def test_joint_ll_matches_naive_arithmetic():
    ds = random_dataset(6, n=3, l=2)
    model = random_model(7, k=2, schema=ds.schema)
    assert joint_log_likelihood(model, ds) == pytest.approx(
        naive_joint_ll(model, ds), abs=1e-10
    )


def test_joint_ll_invariant_under_component_relabel():
    ds = random_dataset(8, n=15, l=4)
    model = random_model(9, k=3, schema=ds.schema)
    perm = [2, 0, 1]
    permuted = MixtureModel(
        model.gate_weights[perm],
        model.eta[perm],
        model.mu[perm],
        model.lam[perm],
        ds.schema,
    )
    assert joint_log_likelihood(permuted, ds) == pytest.approx(
        joint_log_likelihood(model, ds), rel=1e-12
    )


def test_joint_ll_schema_mismatch_rejected():
    ds = random_dataset(10, n=5, l=3)
    model = random_model(11, k=2, schema=schema_of_length(3, dims=3))
    with pytest.raises(ValueError):
        joint_log_likelihood(model, ds)


def test_predict_point_single_component():
    model = uniform_gate_model(k=1, mu=[4.2])
    assert model.predict_point([1.0, 0.0]) == (0, 4.2)


def test_predict_point_tie_breaks_low():
    model = uniform_gate_model(k=2, mu=[0.0, 5.0])
    k, value = model.predict_point([1.0, 1.0])
    assert (k, value) == (0, 0.0)


def test_predict_point_hard_and_soft():
    schema = schema_of_length(1)
    w = np.array([[0.0, math.log(0.9)], [0.0, math.log(0.1)]])
    model = MixtureModel(w, np.full((2, 1), 0.5), np.array([1.0, 3.0]), np.ones(2), schema)
    assert np.allclose(model.gate([0.0]), [0.9, 0.1], atol=1e-12)
    assert model.predict_point([0.0]) == (0, 1.0)
    assert model.predict_soft([0.0]) == pytest.approx(1.2, abs=1e-12)


def test_extract_rules_interval_from_eta():
    schema = SplitSchema(np.array([0, 0]), np.array([0.5, 0.7]))
    model = MixtureModel(
        np.zeros((1, 3)), np.array([[0.99, 0.01]]), np.zeros(1), np.ones(1), schema
    )
    rules = extract_rules(model, tau=0.05)
    comp = rules.components[0]
    assert len(comp.intervals) == 1
    iv = comp.intervals[0]
    assert (iv.feature, iv.lower, iv.upper) == (0, 0.5, 0.7)
    assert rule_text(rules, comp) == "0.5 <= x_1 < 0.7"


def test_extract_rules_catch_all():
    model = uniform_gate_model(k=1, l=3)
    rules = extract_rules(model, tau=0.05)
    assert rules.components[0].catch_all
    assert rule_text(rules, rules.components[0]) == "any x"


def test_extract_rules_flags_degenerate():
    schema = SplitSchema(np.array([0, 0]), np.array([0.5, 0.7]))
    model = MixtureModel(
        np.zeros((1, 3)), np.array([[0.01, 0.99]]), np.zeros(1), np.ones(1), schema
    )
    rules = extract_rules(model, tau=0.05)
    comp = rules.components[0]
    assert comp.degenerate
    assert len(rules.components) == 1  # reported, not dropped
    assert "degenerate" in rule_text(rules, comp)


def test_extract_rules_tiny_tau_reads_pattern():
    schema = SplitSchema(np.array([0, 1, 1]), np.array([0.2, 0.5, 0.8]))
    model = MixtureModel(
        np.zeros((1, 4)), np.array([[1.0, 0.5, 0.0]]), np.zeros(1), np.ones(1), schema
    )
    rules = extract_rules(model, tau=1e-9)
    ivs = {iv.feature: iv for iv in rules.components[0].intervals}
    assert ivs[0].lower == 0.2 and ivs[0].upper == math.inf
    assert ivs[1].upper == 0.8 and ivs[1].lower == -math.inf


def test_extract_rules_keeps_tightest_bounds():
    schema = SplitSchema(np.array([0, 0, 0]), np.array([0.1, 0.3, 0.9]))
    model = MixtureModel(
        np.zeros((1, 4)), np.array([[0.99, 0.97, 0.02]]), np.zeros(1), np.ones(1), schema
    )
    comp = extract_rules(model, tau=0.05).components[0]
    assert comp.intervals[0].lower == 0.3
    assert comp.intervals[0].upper == 0.9


def test_extract_rules_shares_from_data():
    ds = random_dataset(13, n=50, l=4)
    model = random_model(14, k=3, schema=ds.schema)
    rules = extract_rules(model, 0.05, ds)
    shares = [c.share for c in rules.components]
    assert all(s is not None for s in shares)
    assert sum(shares) == pytest.approx(1.0, abs=1e-12)


def test_extract_rules_tau_range_checked():
    model = uniform_gate_model()
    for bad in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            extract_rules(model, bad)


def test_rules_json_layout():
    schema = SplitSchema(np.array([0, 0]), np.array([0.5, 0.7]), ("Temperature",))
    model = MixtureModel(
        np.zeros((1, 3)), np.array([[0.99, 0.01]]), np.array([2.0]), np.ones(1), schema
    )
    doc = rules_to_json_dict(extract_rules(model, 0.05))
    comp = doc["components"][0]
    assert comp["mu"] == 2.0
    assert comp["intervals"] == [
        {"feature": 0, "name": "Temperature", "lower": 0.5, "upper": 0.7}
    ]


def test_render_text_has_header_and_rows():
    model = uniform_gate_model(k=2, mu=[1.0, 2.0])
    text = render_rules_text(extract_rules(model, 0.05))
    lines = text.splitlines()
    assert lines[0].endswith("rule")
    assert len(lines) == 3
