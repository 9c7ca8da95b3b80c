"""Config parsing, CSV and JSON round-trips, atomic writes."""

import dataclasses
import os

import numpy as np
import pytest

from opensirs import ModelParams, integrate
from opensirs.errors import ConfigError
from opensirs.formats import (
    atomic_write_text,
    emit_json,
    format_float,
    load_config,
    parse_config,
    parse_json,
    parse_range,
    parse_trajectory_csv,
    to_jsonable,
    trajectory_csv_rows,
    write_trajectory_csv,
)

from conftest import GENERIC_A_PARAMS

GOOD_TEXT = """\
# generic parameter set
b = 0.3
d = 0.2
eps1 = 1.0
eps2 = 2.0
lambda = 0.7
alpha = 0.5
gamma = 0.4
beta1 = 0.1
beta2 = 0.2
"""


def test_parse_config_good():
    cfg = parse_config(GOOD_TEXT, source="good.cfg")
    assert cfg.params == GENERIC_A_PARAMS
    assert cfg.options == {}
    assert cfg.source == "good.cfg"


def test_parse_config_options_and_comments():
    text = GOOD_TEXT + "t_end = 40.0   # inline comment\n"
    cfg = parse_config(text, source="x", allowed_options=("t_end",))
    assert cfg.options == {"t_end": "40.0"}
    # same key is unknown without the allowance
    with pytest.raises(ConfigError, match=r"x:11: unknown key 't_end'"):
        parse_config(text, source="x")


def test_parse_config_malformed_line():
    text = GOOD_TEXT.replace("alpha = 0.5", "alpha 0.5")
    with pytest.raises(ConfigError, match=r"bad\.cfg:7: expected key=value"):
        parse_config(text, source="bad.cfg")


def test_parse_config_duplicate_key():
    text = GOOD_TEXT + "b = 0.4\n"
    with pytest.raises(ConfigError, match=r":11: duplicate key 'b'"):
        parse_config(text)


def test_parse_config_non_numeric_value():
    text = GOOD_TEXT.replace("eps2 = 2.0", "eps2 = two")
    with pytest.raises(ConfigError, match=r":5: value for 'eps2' is not a number: 'two'"):
        parse_config(text)


def test_parse_config_missing_keys():
    text = "\n".join(ln for ln in GOOD_TEXT.splitlines() if not ln.startswith(("gamma", "beta2")))
    with pytest.raises(ConfigError, match=r"missing parameter keys: gamma, beta2"):
        parse_config(text)


def test_parse_config_invalid_params_rejected():
    # negative rate passes the line parse but fails parameter validation
    text = GOOD_TEXT.replace("eps1 = 1.0", "eps1 = -1.0")
    with pytest.raises(ConfigError, match="eps1"):
        parse_config(text)
    # beta1 = beta2 = 0 violates the positive-outside-transmission requirement
    text = GOOD_TEXT.replace("beta1 = 0.1", "beta1 = 0.0").replace("beta2 = 0.2", "beta2 = 0.0")
    with pytest.raises(ConfigError, match="beta"):
        parse_config(text)


def test_load_config_round_trip(tmp_path):
    path = str(tmp_path / "params.cfg")
    atomic_write_text(path, GOOD_TEXT)
    cfg = load_config(path)
    assert cfg.params == GENERIC_A_PARAMS
    assert cfg.source == path


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(str(tmp_path / "absent.cfg"))


def test_parse_range():
    assert parse_range("0.5:2.5:9", "beta_range") == (0.5, 2.5, 9)
    with pytest.raises(ConfigError, match="must be lo:hi:n"):
        parse_range("0.5:2.5", "beta_range")
    with pytest.raises(ConfigError, match="numeric parts"):
        parse_range("a:b:c", "beta_range")


def test_format_float_round_trips_exactly():
    rng = np.random.default_rng(11)
    values = list(rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, size=200))
    values += [0.0, 1e-300, 1e300, np.pi]
    for v in values:
        assert float(format_float(float(v))) == float(v)


def test_trajectory_csv_headers_by_system():
    p = GENERIC_A_PARAMS
    planar = integrate("planar", p, (0.6, 0.2), 1.0, n_store=5)
    props = integrate("proportions", p, (0.6, 0.2, 0.2), 1.0, n_store=5)
    pop = integrate("population", p, (600.0, 200.0, 200.0), 1.0, n_store=5)
    assert trajectory_csv_rows(planar)[0] == ["t", "s", "i"]
    assert trajectory_csv_rows(props)[0] == ["t", "s", "i", "r"]
    header, data = trajectory_csv_rows(pop)
    assert header == ["t", "s", "i", "r", "S", "I", "R", "N"]
    # proportion columns are the count columns normalized
    assert np.allclose(data[:, 1:4] * data[:, 7][:, None], data[:, 4:7], atol=1e-12)


def test_trajectory_csv_round_trip(tmp_path):
    p = GENERIC_A_PARAMS
    traj = integrate("proportions", p, (0.55, 0.25, 0.2), 3.0, n_store=17)
    path = str(tmp_path / "traj.csv")
    write_trajectory_csv(traj, path)
    with open(path, encoding="utf-8") as fh:
        header, data = parse_trajectory_csv(fh.read())
    assert header == ["t", "s", "i", "r"]
    expect = np.column_stack([traj.times, traj.states])
    assert data.shape == expect.shape
    # 17 significant digits reproduce every float bit-exactly
    assert np.array_equal(data, expect)


def test_parse_trajectory_csv_empty():
    with pytest.raises(ValueError, match="empty CSV"):
        parse_trajectory_csv("\n\n")


def test_to_jsonable_tags_dataclasses():
    @dataclasses.dataclass
    class Leaf:
        value: float
        spectrum: tuple

    leaf = Leaf(value=np.float64(0.5), spectrum=(complex(-0.6, 0.632), complex(-0.6, -0.632)))
    out = to_jsonable({"leaf": leaf, "arr": np.arange(3), "flag": True})
    assert out["leaf"]["type"] == "Leaf"
    assert out["leaf"]["value"] == 0.5
    assert out["leaf"]["spectrum"][0] == {"re": -0.6, "im": 0.632}
    assert out["arr"] == [0, 1, 2]
    assert out["flag"] is True
    with pytest.raises(TypeError, match="cannot serialize"):
        to_jsonable(object())


def test_emit_json_parse_json_round_trip():
    obj = {"a": [1.5, 2.5], "b": {"re": 1.0, "im": -2.0}, "c": None}
    assert parse_json(emit_json(obj)) == obj


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = str(tmp_path / "out.txt")
    atomic_write_text(path, "alpha\n")
    atomic_write_text(path, "beta\n")
    with open(path, encoding="utf-8") as fh:
        assert fh.read() == "beta\n"
    assert os.listdir(str(tmp_path)) == ["out.txt"]
