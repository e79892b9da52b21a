import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausswit import OptimizerConfig, PartitionQuery, PartyStructure, evaluate_lambda
from gausswit.criterion import Status
from gausswit.state_model import (
    AsymmetryError,
    DimensionError,
    InputError,
    REPORT_SCHEMA,
    StateFormatError,
    as_covariance,
    load_report,
    load_state,
    restrict_state,
    save_report,
    save_state,
    uncertainty_margin,
)
from gausswit.states import mixed_bipartite_cm, vacuum_cm


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


def test_load_identity_two_parties(tmp_path):
    f = write_json(tmp_path / "s.json", {"party_sizes": [1, 1], "cm": np.eye(4).tolist()})
    ps, cm = load_state(f)
    assert ps.party_sizes == (1, 1)
    assert ps.total_modes == 2
    np.testing.assert_array_equal(cm, np.eye(4))


def test_load_mixed_state_file(tmp_path):
    _, m = mixed_bipartite_cm(0.1)
    f = write_json(tmp_path / "s.json", {"party_sizes": [2, 2], "cm": m.tolist()})
    ps, cm = load_state(f)
    assert ps.party_sizes == (2, 2)
    assert cm.shape == (8, 8)
    np.testing.assert_array_equal(cm, m)


def test_dimension_mismatch(tmp_path):
    f = write_json(tmp_path / "s.json", {"party_sizes": [1, 1], "cm": np.eye(6).tolist()})
    with pytest.raises(DimensionError):
        load_state(f)


@pytest.mark.parametrize("payload", [
    "not json",
    json.dumps([1, 2, 3]),
    json.dumps({"party_sizes": [1]}),
    json.dumps({"party_sizes": [1.5], "cm": [[1, 0], [0, 1]]}),
    json.dumps({"party_sizes": [1], "cm": [[1, "x"], [0, 1]]}),
    json.dumps({"party_sizes": [1], "cm": [[1, 0], [0]]}),
    json.dumps({"party_sizes": [0], "cm": []}),
])
def test_malformed_files(tmp_path, payload):
    f = tmp_path / "bad.json"
    f.write_text(payload)
    with pytest.raises(InputError):
        load_state(f)


def test_missing_file(tmp_path):
    with pytest.raises(StateFormatError):
        load_state(tmp_path / "nope.json")


def test_small_asymmetry_is_symmetrized():
    m = np.eye(4)
    m[0, 1] = 1e-10
    cm = as_covariance(m, PartyStructure((1, 1)))
    assert np.array_equal(cm, cm.T)
    assert cm[0, 1] == 5e-11


def test_large_asymmetry_rejected():
    m = np.eye(4)
    m[0, 1] = 1e-6
    with pytest.raises(AsymmetryError):
        as_covariance(m, PartyStructure((1, 1)))


def test_loaded_matrix_is_read_only(tmp_path):
    f = write_json(tmp_path / "s.json", {"party_sizes": [1], "cm": np.eye(2).tolist()})
    _, cm = load_state(f)
    with pytest.raises(ValueError):
        cm[0, 0] = 3.0


def test_state_round_trip(tmp_path, rng):
    ps = PartyStructure((2, 1, 3))
    x = rng.standard_normal((ps.dim, ps.dim))
    cm = as_covariance((x + x.T) / 2, ps)
    save_state(ps, cm, tmp_path / "s.json")
    ps2, cm2 = load_state(tmp_path / "s.json")
    assert ps2 == ps
    assert np.max(np.abs(cm2 - cm)) <= 1e-15


@pytest.mark.parametrize("sizes", [(), (0,), (1, -2)])
def test_party_structure_invariants(sizes):
    with pytest.raises(DimensionError):
        PartyStructure(sizes)


def test_offsets():
    ps = PartyStructure((2, 1, 3))
    assert ps.offsets == (0, 2, 3)
    assert ps.dim == 12
    assert ps.quadrature_index(1, 1, "x") == 1
    assert ps.quadrature_index(2, 1, "p") == 6
    assert ps.quadrature_index(3, 3, "p") == 12


@given(st.lists(st.integers(1, 4), min_size=1, max_size=5))
def test_index_map_is_bijection(sizes):
    ps = PartyStructure(tuple(sizes))
    seen = set()
    for party, s in enumerate(sizes, start=1):
        for mode in range(1, s + 1):
            for q in "xp":
                idx = ps.quadrature_index(party, mode, q)
                assert ps.locate(idx) == (party, mode, q)
                seen.add(idx)
    assert seen == set(range(1, ps.dim + 1))


@pytest.mark.parametrize("parties", [(1,), (2, 1), (1, 1), (0, 1)])
def test_partition_query_invariants(parties):
    with pytest.raises(InputError):
        PartitionQuery(parties)


def test_partition_query_range():
    q = PartitionQuery((1, 4))
    with pytest.raises(InputError):
        q.validate_for(3)


def test_restrict_state_keeps_party_blocks(rng):
    ps = PartyStructure((1, 2, 1))
    x = rng.standard_normal((8, 8))
    cm = (x + x.T) / 2
    sub_ps, sub = restrict_state(ps, cm, (2, 3))
    assert sub_ps.party_sizes == (2, 1)
    np.testing.assert_array_equal(sub, cm[2:, 2:])


def test_uncertainty_margin_vacuum_is_zero():
    _, cm = vacuum_cm(3)
    assert abs(uncertainty_margin(cm)) < 1e-12


@pytest.fixture(scope="module")
def reports():
    cfg = OptimizerConfig(restarts=8, seed=3)
    ps, cm = vacuum_cm(2)
    inconclusive = evaluate_lambda(cm, ps, PartitionQuery((1, 2)), cfg)
    ps, cm = mixed_bipartite_cm(0.1)
    entangled = evaluate_lambda(cm, ps, PartitionQuery((1, 2)), cfg, timestamp="2024-01-01T00:00:00+00:00")
    return inconclusive, entangled


def test_report_round_trip(tmp_path, reports):
    for i, report in enumerate(reports):
        path = tmp_path / f"r{i}.json"
        save_report(report, path)
        again = load_report(path)
        assert again.to_dict() == report.to_dict()
        assert again == report


def test_report_schema_fields(tmp_path, reports):
    inconclusive, entangled = reports
    save_report(entangled, tmp_path / "e.json")
    data = json.loads((tmp_path / "e.json").read_text())
    jsonschema.validate(data, REPORT_SCHEMA)
    assert data["status"] == "entangled"
    assert len(data["witness"]["alpha"]) == 2
    assert len(data["witness"]["alpha"][0]) == 2
    assert {"k", "parties", "min_value"} <= set(data["minors"][0])
    assert set(data["optimizer"]) >= {"restarts", "seed", "tolerance"}

    save_report(inconclusive, tmp_path / "i.json")
    data = json.loads((tmp_path / "i.json").read_text())
    assert data["status"] == "inconclusive"
    assert inconclusive.status is Status.INCONCLUSIVE


def test_schema_rejects_unknown_status(reports):
    data = reports[0].to_dict()
    data["status"] = "separable"
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(data, REPORT_SCHEMA)
