import pytest

from singlink.config import ConfigError, RunConfig, from_environment, read_yaml


def test_defaults():
    config = RunConfig.load(environ={})
    assert config.epsilon == 1e-2
    assert config.samples == 4096
    assert config.tol == 1e-10
    assert config.trace_mode == "continuation"
    assert config.lam is None


def test_yaml_file_with_aliases(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("epsilon: 5e-3\nsamples: 8192\nlambda: 1.0e-4\nchi: 2\ndbl: 1\n")
    config = RunConfig.load(path, environ={})
    assert config.epsilon == 5e-3
    assert config.samples == 8192
    assert config.lam == 1e-4
    assert (config.euler_char, config.double_points) == (2, 1)


def test_precedence(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("epsilon: 0.005\nsamples: 8192\ntrace_mode: multiseed\n")
    environ = {"SINGLINK_EPSILON": "0.002", "SINGLINK_TRACE_MODE": "continuation"}
    config = RunConfig.load(path, {"epsilon": 0.001, "samples": None}, environ)
    assert config.epsilon == 0.001
    assert config.samples == 8192
    assert config.trace_mode == "continuation"


def test_empty_yaml_file(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("# nothing set\n")
    assert read_yaml(path) == {}


@pytest.mark.parametrize(
    "text",
    ["epsilon: [1, 2\n", "- epsilon\n- samples\n", "epsilons: 0.1\n", "samples: lots\n"],
)
def test_bad_yaml_files(tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        RunConfig.load(path, environ={})


def test_missing_yaml_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "absent.yaml", environ={})


def test_environment():
    values = from_environment({"SINGLINK_SAMPLES": "1024", "SINGLINK_WORKERS": "", "HOME": "/root"})
    assert values == {"samples": 1024}
    with pytest.raises(ConfigError):
        from_environment({"SINGLINK_TOL": "tight"})


@pytest.mark.parametrize(
    "overrides",
    [
        {"epsilon": 0.0},
        {"epsilon": -1e-2},
        {"samples": 1000},
        {"samples": 128},
        {"tol": 0.0},
        {"trace_mode": "newton"},
        {"lam": -1e-4},
        {"r": 0.0},
    ],
)
def test_validate_rejects(overrides):
    with pytest.raises(ConfigError):
        RunConfig.load(overrides=overrides, environ={})


def test_unknown_override():
    with pytest.raises(ConfigError):
        RunConfig().merged({"colour": "blue"})
