import json

import pytest

from eiolib.config import EstimateConfig, VerifyConfig, load_config
from eiolib.datagen import InstrumentGenerator, RandomDesignGenerator
from eiolib.errors import InputValidationError
from eiolib.penalty import RidgePenalty, RowTruncationPenalty


def write_config(tmp_path, payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_defaults_without_a_file():
    config = load_config("verify")
    assert isinstance(config, VerifyConfig)
    assert config.studies == ["fisher", "wilks", "risk"]
    assert config.generator.build().spec.p == 8
    assert config.min_slack == 2.0


def test_flags_override_the_file(tmp_path):
    path = write_config(tmp_path, {"replicates": 10, "seed": 3})
    config = load_config("verify", path, {"replicates": 20, "jobs": None, "out": str(tmp_path)})
    assert config.replicates == 20
    assert config.seed == 3
    assert config.out == str(tmp_path)


def test_unknown_keys_are_rejected(tmp_path):
    with pytest.raises(InputValidationError):
        load_config("estimate", write_config(tmp_path, {"instance": ".", "lambda": 1.0}))
    with pytest.raises(InputValidationError):
        load_config("simulate", None, {"replicates": 3})


@pytest.mark.parametrize(
    "payload",
    [
        {"replicates": 0},
        {"x": -1.0},
        {"generator": {"p": 5, "q": 3}},
        {"generator": {"delta0": 0.5}},
        {"studies": []},
        {"min_slack": -1.0},
    ],
)
def test_invalid_values_are_input_errors(tmp_path, payload):
    with pytest.raises(InputValidationError) as info:
        load_config("verify", write_config(tmp_path, payload))
    assert info.value.exit_code == 2


def test_config_must_be_an_object(tmp_path):
    with pytest.raises(InputValidationError):
        load_config("verify", write_config(tmp_path, [1, 2]))


def test_penalty_specs_build():
    config = EstimateConfig.model_validate(
        {"penalty": {"signal": {"kind": "ridge", "g2": 0.5}, "operator": {"kind": "row_truncation", "m": 3}}}
    )
    pen = config.penalty.build()
    assert pen.signal == RidgePenalty(0.5)
    assert pen.operator == RowTruncationPenalty(3)


def test_regression_generators_build(tmp_path):
    base = {"n": 20, "q": 3, "theta": [1.0, 0.5], "nodes": 16}
    random_design = load_config("simulate", write_config(tmp_path, {"generator": {"kind": "random_design", **base}}))
    assert isinstance(random_design.generator.build(), RandomDesignGenerator)
    iv = load_config("simulate", write_config(tmp_path, {"generator": {"kind": "iv", **base}}))
    assert isinstance(iv.generator.build(), InstrumentGenerator)


def test_rate_study_grid_must_be_positive(tmp_path):
    with pytest.raises(InputValidationError):
        load_config("rate-study", write_config(tmp_path, {"n1_grid": [1e3, -1.0]}))
