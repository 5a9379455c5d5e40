import json

import numpy as np
import pytest
from conftest import reference_generator

from eiolib.errors import EXIT_INPUT_VALIDATION, InputValidationError, MalformedInputError
from eiolib.instancefiles import (
    A_HAT_FILE,
    META_FILE,
    TRUTH_FILE,
    Z_FILE,
    read_instance,
    read_json,
    read_matrix,
    read_vector,
    write_instance,
    write_json,
    write_matrix,
)


def test_instance_files_read_back_exactly(tmp_path):
    instance = reference_generator(p=3, q=4).generate(2)
    written = write_instance(tmp_path, instance, {"seed": 2})
    assert [path.name for path in written] == [Z_FILE, A_HAT_FILE, META_FILE, TRUTH_FILE]
    loaded = read_instance(tmp_path)
    np.testing.assert_array_equal(loaded.observation.z_obs, instance.observation.z_obs)
    np.testing.assert_array_equal(loaded.observation.a_hat, instance.observation.a_hat)
    np.testing.assert_array_equal(loaded.truth.a_star, instance.truth.a_star)
    assert loaded.observation.mu2 == instance.observation.mu2
    assert loaded.meta["config"] == {"seed": 2}


def test_files_use_lf_line_endings(tmp_path):
    write_matrix(tmp_path / "m.csv", [[1.0, 2.5], [3.0, 4.0]])
    assert (tmp_path / "m.csv").read_bytes() == b"1.0,2.5\n3.0,4.0\n"


def test_mu2_override(tmp_path):
    write_instance(tmp_path, reference_generator(p=2, q=2).generate(0))
    assert read_instance(tmp_path, mu2=5.0).observation.mu2 == 5.0


def test_malformed_csv_reports_the_line(tmp_path):
    path = tmp_path / Z_FILE
    path.write_text("1.0\n2.0\nabc\n", encoding="utf-8")
    with pytest.raises(MalformedInputError) as info:
        read_vector(path)
    assert info.value.line == 3
    assert str(info.value).startswith(f"{path}:3:")
    assert info.value.exit_code == EXIT_INPUT_VALIDATION


def test_ragged_matrix_is_rejected(tmp_path):
    path = tmp_path / A_HAT_FILE
    path.write_text("1,2\n3\n", encoding="utf-8")
    with pytest.raises(MalformedInputError) as info:
        read_matrix(path)
    assert info.value.line == 2


def test_vector_file_needs_one_column(tmp_path):
    path = tmp_path / Z_FILE
    path.write_text("1,2\n", encoding="utf-8")
    with pytest.raises(MalformedInputError):
        read_vector(path)


def test_missing_files(tmp_path):
    with pytest.raises(InputValidationError):
        read_instance(tmp_path)


def test_json_reports(tmp_path):
    write_json(tmp_path / "r.json", {"values": np.arange(3.0), "flag": np.bool_(True)})
    assert read_json(tmp_path / "r.json") == {"values": [0.0, 1.0, 2.0], "flag": True}
    (tmp_path / "bad.json").write_text("{\n  oops\n}", encoding="utf-8")
    with pytest.raises(MalformedInputError) as info:
        read_json(tmp_path / "bad.json")
    assert info.value.line == 2


def test_metadata_must_carry_mu2(tmp_path):
    write_instance(tmp_path, reference_generator(p=2, q=2).generate(0))
    meta = json.loads((tmp_path / META_FILE).read_text(encoding="utf-8"))
    del meta["mu2"]
    (tmp_path / META_FILE).write_text(json.dumps(meta), encoding="utf-8")
    with pytest.raises(MalformedInputError):
        read_instance(tmp_path)
