import json
import math

import numpy as np
import pytest

from bellcheck.bell.moments import FeasibilityStatus, MomentInstance, check_feasibility, verify_result
from bellcheck.errors import InstanceSchemaError
from bellcheck.storage.instances import (
    bundled_instance_path, dump_instance, instance_from_document, list_bundled_instances, load_instance,
    load_operator_file,
)


def _write(tmp_path, doc, name="case.instance"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_bundled_instances_exist():
    assert list_bundled_instances() == ["chsh_quantum", "cosine_half", "vertex"]
    assert bundled_instance_path("vertex").exists()
    assert bundled_instance_path("vertex.instance") == bundled_instance_path("vertex")


@pytest.mark.parametrize("name, status", [
    ("chsh_quantum", FeasibilityStatus.INFEASIBLE),
    ("cosine_half", FeasibilityStatus.FEASIBLE),
    ("vertex", FeasibilityStatus.FEASIBLE),
])
def test_bundled_instances_decide_and_audit(name, status):
    instance = load_instance(bundled_instance_path(name))
    assert instance.party1_angles == pytest.approx((0.0, math.pi / 2))
    result = check_feasibility(instance)
    assert result.status is status
    assert verify_result(instance, result)


def test_chsh_bundle_targets_match_quantum_values():
    instance = load_instance(bundled_instance_path("chsh_quantum"))
    fresh = MomentInstance.from_settings(instance.party1_angles, instance.party2_angles)
    assert np.allclose(instance.targets, fresh.targets, atol=1e-15)


def test_vector_settings(tmp_path):
    doc = {
        "schema": 1,
        "party1": {"vectors": [[0, 0, 1]]},
        "party2": {"vectors": [[1, 0, 0], [0, 1, 0]]},
        "targets": [[0.0, 0.0]],
    }
    instance = load_instance(_write(tmp_path, doc))
    assert (instance.m, instance.n) == (1, 2)
    assert instance.party2_angles is None


def test_dump_then_load(tmp_path):
    instance = MomentInstance.from_settings([0.0, 1.0], [(0.0, 1.0, 0.0)], [[0.25], [-0.5]])
    path = tmp_path / "out.instance"
    dump_instance(instance, path, description="mixed settings")
    raw = json.loads(path.read_text(encoding="utf-8"))
    assert raw["schema"] == 1
    assert raw["party1"]["angles_deg"] == pytest.approx([0.0, math.degrees(1.0)])
    assert raw["party2"] == {"vectors": [[0.0, 1.0, 0.0]]}
    again = load_instance(path)
    assert np.array_equal(again.targets, instance.targets)
    assert again.party1_angles == pytest.approx((0.0, 1.0))


@pytest.mark.parametrize("doc", [
    {"schema": 2, "party1": {"angles_deg": [0]}, "party2": {"angles_deg": [0]}, "targets": [[0]]},
    {"schema": 1, "party1": {"angles_deg": [0]}, "targets": [[0]]},
    {"schema": 1, "party1": {"angles_deg": []}, "party2": {"angles_deg": [0]}, "targets": [[]]},
    {"schema": 1, "party1": {"angles_deg": [0]}, "party2": {"angles_deg": [0, 90]}, "targets": [[0]]},
    {"schema": 1, "party1": {"angles_deg": [0]}, "party2": {"angles_deg": [0]}, "targets": [[2]]},
    {"schema": 1, "party1": {"vectors": [[1, 1, 0]]}, "party2": {"angles_deg": [0]}, "targets": [[0]]},
    {"schema": 1, "m": 2, "party1": {"angles_deg": [0]}, "party2": {"angles_deg": [0]}, "targets": [[0]]},
    {"schema": 1, "party1": {"angles_deg": [0]}, "party2": {"angles_deg": [0]}, "targets": [[0]], "extra": 1},
])
def test_schema_violations(doc):
    with pytest.raises(InstanceSchemaError):
        instance_from_document(doc)


def test_missing_and_garbled_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_instance(tmp_path / "nope.instance")
    bad = tmp_path / "bad.instance"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(InstanceSchemaError) as info:
        load_instance(bad)
    assert info.value.path == str(bad)


def test_operator_file(tmp_path):
    doc = {
        "schema": 1,
        "operators": [{"real": [[0, 1], [1, 0]]}, {"real": [[0, 0], [0, 0]], "imag": [[0, -1], [1, 0]]}],
        "state": {"real": [1, 0]},
    }
    path = tmp_path / "ops.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    ops, state = load_operator_file(path)
    assert np.array_equal(ops[1], np.array([[0, -1j], [1j, 0]]))
    assert np.array_equal(state, np.array([1, 0], dtype=complex))
    with pytest.raises(InstanceSchemaError):
        load_operator_file(_write(tmp_path, {"schema": 1, "operators": [], "state": {"real": [1]}}))
