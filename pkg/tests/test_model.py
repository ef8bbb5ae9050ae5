import json

import numpy as np
import pytest

from pairsha import (
    LevelSpec,
    build_model,
    coupling_from_rule,
    enumerate_basis,
    parse_model_config,
)

from oracles import dimension_by_polynomial, fourlevel


def test_benchmark_dimension():
    basis = enumerate_basis(fourlevel(0.15))
    assert basis.dimension == 3231


def test_single_level_dimension():
    model = build_model([LevelSpec(j=2.5, epsilon=1.0)], [[0.1]], 3)
    assert enumerate_basis(model).dimension == 1


def test_two_level_enumeration_order():
    model = build_model(
        [LevelSpec(j=1, epsilon=0.0), LevelSpec(j=1, epsilon=0.0)], np.zeros((2, 2)), 2
    )
    basis = enumerate_basis(model)
    assert basis.dimension == 3
    assert basis.pair_counts.tolist() == [[0, 2], [1, 1], [2, 0]]
    # lexicographic ascending in m
    assert basis.two_m.tolist() == [[-2, 2], [0, 0], [2, -2]]


def test_dimension_matches_polynomial_oracle(random_model):
    for _ in range(25):
        model = random_model()
        caps = [int(c) for c in model.two_j_eff]
        expected = dimension_by_polynomial(caps, model.N)
        assert enumerate_basis(model).dimension == expected


def test_level_permutation_permutes_components(rng):
    model = fourlevel(0.1)
    perm = rng.permutation(model.k)
    permuted = build_model(
        [model.levels[p] for p in perm], model.G[np.ix_(perm, perm)], model.N
    )
    basis = enumerate_basis(model)
    basis_p = enumerate_basis(permuted)
    assert basis_p.dimension == basis.dimension
    original = {tuple(row) for row in basis.two_m.tolist()}
    mapped = {tuple(row[p] for p in np.argsort(perm)) for row in basis_p.two_m.tolist()}
    assert mapped == original


def test_index_round_trip():
    basis = enumerate_basis(fourlevel(0.15))
    for i in range(0, basis.dimension, 97):
        assert basis.index_of(basis.state_m(i)) == i
    with pytest.raises(ValueError):
        basis.position((1, 1, 1, 1))


def test_pair_sum_constraint():
    model = fourlevel(0.15)
    basis = enumerate_basis(model)
    assert np.all(basis.pair_counts.sum(axis=1) == model.N)
    assert np.all(basis.two_m.sum(axis=1) == 2 * model.N - model.two_j_eff.sum())


def test_build_model_rejections():
    lv = LevelSpec(j=1, epsilon=0.0)
    with pytest.raises(ValueError, match="capacity"):
        build_model([lv], [[0.0]], 3)
    with pytest.raises(ValueError, match="symmetric"):
        build_model([lv, lv], [[0.0, 0.1], [0.2, 0.0]], 1)
    with pytest.raises(ValueError, match="shape"):
        build_model([lv, lv], [[0.0]], 1)
    with pytest.raises(ValueError, match="finite"):
        build_model([lv], [[np.inf]], 1)
    with pytest.raises(ValueError):
        build_model([], np.zeros((0, 0)), 0)
    with pytest.raises(ValueError, match="integer"):
        build_model([lv], [[0.0]], 1.5)


def test_level_spec_rejections():
    with pytest.raises(ValueError):
        LevelSpec(j=0, epsilon=0.0)
    with pytest.raises(ValueError):
        LevelSpec(j=-1, epsilon=0.0)
    with pytest.raises(ValueError):
        LevelSpec(j=0.7, epsilon=0.0)
    with pytest.raises(ValueError, match="seniority"):
        LevelSpec(j=1, epsilon=0.0, seniority=3)
    with pytest.raises(ValueError):
        LevelSpec(j=1, epsilon=0.0, seniority=-1)


def test_seniority_reduces_quasispin_and_adds_offset():
    lv = LevelSpec(j=7, epsilon=0.5, seniority=1)
    assert lv.j_eff == 6.5
    assert lv.two_j_eff == 13
    model = build_model([lv, LevelSpec(j=2, epsilon=1.5, seniority=2)], np.zeros((2, 2)), 4)
    # one unpaired particle at 0.5 plus two at 1.5
    assert model.seniority_energy_offset == pytest.approx(0.5 + 2 * 1.5)
    assert model.max_pairs == 13 + 2


def test_fully_blocked_level_allowed_in_basis():
    lv = LevelSpec(j=1, epsilon=0.3, seniority=2)
    assert lv.two_j_eff == 0
    model = build_model([lv, LevelSpec(j=2, epsilon=0.0)], np.zeros((2, 2)), 2)
    basis = enumerate_basis(model)
    assert basis.dimension == 1
    assert basis.pair_counts.tolist() == [[0, 2]]


def test_coupling_rule_values():
    eps = [0.5, 2.3, 6.1, 7.3]
    G = coupling_from_rule(0.150, eps)
    assert np.allclose(np.diag(G), 2.0 * 0.150)
    assert G[0, 3] == pytest.approx(0.198, abs=1e-12)
    assert np.array_equal(G, G.T)
    assert np.all(coupling_from_rule(0.0, eps) == 0.0)
    with pytest.raises(ValueError):
        coupling_from_rule(-0.1, eps)


def test_enumeration_cap_guard():
    with pytest.raises(ValueError, match="cap"):
        enumerate_basis(fourlevel(0.15), max_states=10)


def test_config_parsing_explicit_and_rule():
    cfg = {
        "levels": [{"j": 1, "epsilon": 0.0}, {"j": 1.5, "epsilon": 2.0, "seniority": 1}],
        "N": 2,
        "G": [[0.2, 0.1], [0.1, 0.2]],
    }
    model = parse_model_config(cfg)
    assert model.k == 2 and model.N == 2
    assert model.levels[1].j_eff == 1.0

    rule_cfg = {
        "name": "demo",
        "levels": [{"j": 2, "epsilon": 0.0}, {"j": 2, "epsilon": 1.0}],
        "N": 3,
        "G": {"rule": "paper", "g": 0.3},
    }
    model = parse_model_config(rule_cfg)
    assert model.G[0, 0] == pytest.approx(0.6)
    assert model.G[0, 1] == pytest.approx(1.9 * 0.3)

    overridden = parse_model_config(rule_cfg, g_override=0.1)
    assert overridden.G[0, 0] == pytest.approx(0.2)

    assert parse_model_config(json.dumps(rule_cfg)).N == 3


def test_config_rejections():
    good = {
        "levels": [{"j": 1, "epsilon": 0.0}],
        "N": 1,
        "G": {"rule": "paper", "g": 0.1},
    }
    with pytest.raises(ValueError, match="unknown config keys"):
        parse_model_config({**good, "extra": 1})
    with pytest.raises(ValueError, match="missing"):
        parse_model_config({"levels": good["levels"], "N": 1})
    with pytest.raises(ValueError, match="rule"):
        parse_model_config({**good, "G": {"rule": "other", "g": 0.1}})
    with pytest.raises(ValueError, match="unknown level keys"):
        parse_model_config({**good, "levels": [{"j": 1, "epsilon": 0.0, "x": 2}]})
    with pytest.raises(ValueError, match="override"):
        parse_model_config({**good, "G": [[0.1]]}, g_override=0.2)
    with pytest.raises(ValueError, match="'g'"):
        parse_model_config({**good, "G": {"rule": "paper"}})
