# Python standard library imports
import json

# Third party imports
import pytest

# Application imports
from app.config.environment_config import EnvironmentConfig
from app.config.run_config_parser import parse_config
from app.error_handling.exceptions.config_validation_exception import ConfigValidationException
from app.error_handling.exceptions.persistence_exception import PersistenceException
from app.models.config.config_enums import TrainingMode


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv("PMOE_SEED", raising=False)
    EnvironmentConfig.reset()
    yield
    EnvironmentConfig.reset()


@pytest.fixture
def write_config(tmp_path):
    def write(values) -> str:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(values), encoding="utf-8")
        return str(path)
    return write


def test_empty_file_gives_defaults(write_config):
    config = parse_config(write_config({}))
    assert config.rank == 4
    assert config.tau == 6
    assert config.num_layers == 8
    assert config.mode == TrainingMode.PMOE
    assert config.replay_frac == 0.01
    assert config.train_hyper().betas == (0.9, 0.999)


def test_shallow_model_needs_no_sweep_values(write_config):
    config = parse_config(write_config({"num_layers": 2, "tau": 1}))
    assert config.taus is None
    assert config.sweep_taus() == [1]


@pytest.mark.parametrize(
    "values, expected",
    [
        ({}, [2, 4, 6]),
        ({"num_layers": 5, "tau": 2}, [2, 4]),
        ({"num_layers": 4, "tau": 1, "taus": [3, 1]}, [3, 1]),
    ]
)
def test_sweep_taus(write_config, values, expected):
    assert parse_config(write_config(values)).sweep_taus() == expected


def test_tau_outside_depth_names_the_field(write_config):
    with pytest.raises(ConfigValidationException) as excinfo:
        parse_config(write_config({"tau": 9}))
    assert excinfo.value.field == "tau"


def test_override_beats_file(write_config):
    config = parse_config(write_config({"tau": 2, "rank": 8}), {"tau": 4, "rank": None})
    assert config.tau == 4
    assert config.rank == 8


@pytest.mark.parametrize(
    "values, field",
    [
        ({"rank": 64}, "rank"),
        ({"d_model": 130}, "num_heads"),
        ({"bogus": 1}, "bogus"),
        ({"replay_frac": 1.5}, "replay_frac"),
        ({"taus": [2, 8]}, "taus"),
        ({"mode": "adapter-soup"}, "mode"),
    ]
)
def test_invalid_values_name_their_field(write_config, values, field):
    with pytest.raises(ConfigValidationException) as excinfo:
        parse_config(write_config(values))
    assert excinfo.value.field == field


def test_seed_from_environment(monkeypatch, write_config):
    monkeypatch.setenv("PMOE_SEED", "17")
    assert parse_config(write_config({})).seed == 17
    assert parse_config(write_config({"seed": 3})).seed == 3
    assert parse_config(write_config({}), {"seed": 5}).seed == 5


def test_bad_environment_seed(monkeypatch):
    monkeypatch.setenv("PMOE_SEED", "seven")
    with pytest.raises(ConfigValidationException) as excinfo:
        parse_config()
    assert excinfo.value.field == "seed"


def test_file_must_hold_json_object(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigValidationException):
        parse_config(str(path))
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigValidationException):
        parse_config(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(PersistenceException):
        parse_config(str(tmp_path / "absent.json"))
