"""Test instance and solution files."""
import json

import pytest

from formats import (
    InstanceDocument, InstanceFileError, instance_from_text, instance_to_text, read_instance, read_solution,
    solution_from_text, solution_to_text, write_instance, write_solution,
)
from models import FileValidator
from models.instance import VariantSpec
from solvers import brute_force, solve_heuristic


def test_instance_file_round_trip(coordinate_instance, temp_dir):
    """Test floats survive a write and read bit for bit."""
    path = write_instance(coordinate_instance, temp_dir / "instance.json")
    loaded = read_instance(path)
    assert loaded == coordinate_instance
    assert instance_to_text(loaded) == path.read_text(encoding="utf-8")


def test_instance_header(toy_instance):
    """Test the document envelope."""
    data = json.loads(instance_to_text(toy_instance))
    assert data["format"] == "itlp-instance"
    assert data["version"] == 1
    assert data["instance"]["name"] == "toy"


def test_solution_file_round_trip(toy_instance, temp_dir):
    """Test an oracle solution is written and read unchanged."""
    solution = brute_force(toy_instance, VariantSpec.base(1))
    path = write_solution(solution, temp_dir / "out" / "toy.solution.json")
    assert read_solution(path) == solution


def test_solution_fields_in_stable_order(toy_instance):
    """Test the file lists status, objective and configuration before the counts and wall time."""
    data = json.loads(solution_to_text(brute_force(toy_instance, VariantSpec.base(1))))["solution"]
    assert list(data) == [
        "instance_name", "variant", "status", "objective", "breakdown", "configuration",
        "intermodal_flows", "road_flows", "metadata",
    ]
    assert data["status"] == "Optimal"
    assert list(data["metadata"])[:5] == ["status", "engine", "node_count", "lp_count", "wall_time"]
    document = {"format": "itlp-solution", "version": 1, "solution": data}
    assert solution_from_text(json.dumps(document)).status.value == "Optimal"


def test_solution_with_trace(coordinate_instance):
    """Test heuristic traces are part of the solution document."""
    solution = solve_heuristic(coordinate_instance, VariantSpec.base(1))
    loaded = solution_from_text(solution_to_text(solution))
    assert loaded.metadata.trace == solution.metadata.trace


def test_wrong_format_rejected(toy_instance):
    """Test a solution file is not accepted as an instance."""
    text = instance_to_text(toy_instance).replace("itlp-instance", "itlp-solution")
    with pytest.raises(InstanceFileError, match="expected 'itlp-instance'"):
        instance_from_text(text)


def test_unsupported_version(toy_instance):
    """Test unknown versions are refused."""
    data = json.loads(instance_to_text(toy_instance))
    data["version"] = 2
    with pytest.raises(InstanceFileError, match="unsupported version 2"):
        instance_from_text(json.dumps(data))


def test_invalid_json():
    """Test unparsable text is reported with its source."""
    with pytest.raises(InstanceFileError, match="broken.json: not valid JSON"):
        instance_from_text("{", "broken.json")


def test_schema_errors_reported_together(toy_instance):
    """Test every schema error is listed in one message."""
    data = json.loads(instance_to_text(toy_instance))
    del data["instance"]["demand"]
    data["instance"]["alpha"] = "half"
    with pytest.raises(InstanceFileError) as excinfo:
        instance_from_text(json.dumps(data))
    message = str(excinfo.value)
    assert "schema validation failed" in message
    assert "'demand' is a required property" in message
    assert "instance.alpha" in message


def test_shape_errors_after_schema(toy_instance):
    """Test model validation runs after the schema check."""
    data = json.loads(instance_to_text(toy_instance))
    data["instance"]["capacity"] = [1.0]
    with pytest.raises(InstanceFileError, match="capacity must have 2 entries"):
        instance_from_text(json.dumps(data))


def test_missing_file(temp_dir):
    """Test unreadable paths raise the file error."""
    with pytest.raises(InstanceFileError, match="cannot read"):
        read_instance(temp_dir / "absent.json")


def test_file_validator(toy_instance):
    """Test the schema validator on plain dictionaries."""
    validator = FileValidator(InstanceDocument)
    assert validator.is_valid(json.loads(instance_to_text(toy_instance)))
    assert not validator.is_valid({"format": "itlp-instance", "version": 1})
