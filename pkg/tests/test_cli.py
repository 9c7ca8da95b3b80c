"""End-to-end runs of the command-line front end, in process."""

import numpy as np
import pytest

from opensirs.cli import main
from opensirs.formats import format_float, parse_json, parse_trajectory_csv

from conftest import GENERIC_A_PARAMS, SPECIAL_BISTABLE_PARAMS

OPTION_KEY = {"lam": "lambda"}


def write_cfg(tmp_path, params, name="run.cfg", **options):
    lines = []
    for field in ("b", "d", "eps1", "eps2", "lam", "alpha", "gamma", "beta1", "beta2"):
        lines.append(f"{OPTION_KEY.get(field, field)}={format_float(getattr(params, field))}")
    for key, value in options.items():
        lines.append(f"{key}={value}")
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_generic(tmp_path, capsys):
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS)
    code, out, _ = run_cli(capsys, "analyze", cfg)
    assert code == 0
    doc = parse_json(out)
    assert doc["type"] == "RegimeVerdict"
    assert doc["label"] == "A_UniqueGAS"
    assert (doc["mu0"], doc["mu1"], doc["mu2"]) == (1, 0, 0)


def test_exit_1_on_config_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, "analyze", str(tmp_path / "absent.cfg"))
    assert code == 1
    assert "config error" in err
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS, bogus="1")
    code, _, err = run_cli(capsys, "analyze", cfg)
    assert code == 1
    assert "unknown key 'bogus'" in err


def test_exit_1_on_usage_error(capsys):
    # argparse-level problems are remapped from exit 2 to the usage code
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 1


def test_exit_2_on_numerical_failure(tmp_path, capsys):
    # the regime classifier refuses the exact boundary construction
    cfg = write_cfg(tmp_path, SPECIAL_BISTABLE_PARAMS)
    code, _, err = run_cli(capsys, "analyze", cfg)
    assert code == 2
    assert "numerical failure" in err


def test_make_bistable_analyze_chain(tmp_path, capsys):
    out_cfg = str(tmp_path / "bistable.cfg")
    code, _, _ = run_cli(capsys, "make-bistable", "--eps1", "2", "--eps2", "4",
                         "--lambda", "1", "--out", out_cfg, "--quiet")
    assert code == 0
    code, out, _ = run_cli(capsys, "analyze", out_cfg)
    assert code == 0
    doc = parse_json(out)
    assert doc["label"] == "B_TwoSinksOneSaddle"
    assert (doc["mu0"], doc["mu1"], doc["mu2"]) == (2, 1, 0)


def test_special_case_report_and_rejection(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SPECIAL_BISTABLE_PARAMS)
    code, out, _ = run_cli(capsys, "special-case", cfg)
    assert code == 0
    doc = parse_json(out)
    assert doc["type"] == "SpecialCaseReport"
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS)
    code, _, err = run_cli(capsys, "special-case", cfg)
    assert code == 2
    assert "SpecialCaseError" in err


def test_simulate_headers_per_system(tmp_path, capsys):
    p = GENERIC_A_PARAMS
    cases = [
        (dict(system="planar", s0="0.6", i0="0.2"), ["t", "s", "i"]),
        (dict(system="proportions", s0="0.6", i0="0.2", r0="0.2"), ["t", "s", "i", "r"]),
        (dict(system="population", S0="600", I0="200", R0="200"),
         ["t", "s", "i", "r", "S", "I", "R", "N"]),
    ]
    for options, expect in cases:
        cfg = write_cfg(tmp_path, p, t_end="2.0", n_store="205", **options)
        code, out, _ = run_cli(capsys, "simulate", cfg)
        assert code == 0
        header, data = parse_trajectory_csv(out)
        assert header == expect
        assert data.shape == (205, len(expect))


def test_simulate_from_rest_point_is_constant(tmp_path, capsys):
    from opensirs import find_rest_points

    (sink,) = find_rest_points(GENERIC_A_PARAMS, region="D1")
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS, system="planar",
                    s0=format_float(sink.s), i0=format_float(sink.i),
                    t_end="20.0", n_store="40")
    code, out, _ = run_cli(capsys, "simulate", cfg)
    assert code == 0
    _, data = parse_trajectory_csv(out)
    assert np.ptp(data[:, 1]) < 1e-7
    assert np.ptp(data[:, 2]) < 1e-7


def test_index_curve_tokens(tmp_path, capsys):
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS, curve="triangle", inset="1e-4")
    code, out, _ = run_cli(capsys, "index", cfg)
    assert code == 0
    assert parse_json(out)["curve_index"] == 1

    cfg = write_cfg(tmp_path, SPECIAL_BISTABLE_PARAMS, name="ex.cfg", curve="fig32")
    code, out, _ = run_cli(capsys, "index", cfg)
    assert code == 0
    assert parse_json(out)["curve_index"] == 1

    sink_circle = f"circle@({format_float(0.35)},{format_float(0.0)},0.05)"
    cfg = write_cfg(tmp_path, SPECIAL_BISTABLE_PARAMS, name="c.cfg", curve=sink_circle)
    code, out, _ = run_cli(capsys, "index", cfg)
    assert code == 0
    assert parse_json(out)["curve_index"] == 1

    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS, name="bad.cfg", curve="hexagon")
    code, _, err = run_cli(capsys, "index", cfg)
    assert code == 1
    assert "curve must be" in err


def test_index_fig31_requires_special_case(tmp_path, capsys):
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS, curve="fig31")
    code, _, err = run_cli(capsys, "index", cfg)
    assert code == 2
    assert "SpecialCaseError" in err


def test_sweep_csv(tmp_path, capsys):
    from opensirs import analysis

    # perturbed base: the exact boundary construction would be refused per cell
    p = analysis.perturb_special_case(SPECIAL_BISTABLE_PARAMS, 1e-3)
    cfg = write_cfg(tmp_path, p, axis1="beta", axis1_range="0.0:2.6:3",
                    axis2="alpha", axis2_range="0.8:1.2:3")
    code, out, _ = run_cli(capsys, "sweep", cfg)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "axis1,axis2,label,mu0,mu1,mu2,degenerate_flag"
    assert len(lines) == 1 + 9
    cells = {}
    for ln in lines[1:]:
        a1, a2, label, mu0, mu1, mu2, flag = ln.split(",")
        cells[(float(a1), float(a2))] = (label, mu0, mu1, mu2, flag)
    # beta=0 kills outside transmission: parameter validation fails per cell
    for alpha in (0.8, 1.0, 1.2):
        label, mu0, mu1, mu2, flag = cells[(0.0, alpha)]
        assert label.startswith("error:")
        assert (mu0, mu1, mu2) == ("", "", "")
    label, mu0, mu1, mu2, flag = cells[(2.6, 1.0)]
    assert label == "B_TwoSinksOneSaddle"
    assert (mu0, mu1, mu2, flag) == ("2", "1", "0", "0")


def test_portrait_deterministic_for_seed(tmp_path, capsys):
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS, trajectories="3", t_end="10.0")
    p1, p2, p3 = (str(tmp_path / f"p{k}.svg") for k in range(3))
    assert run_cli(capsys, "portrait", cfg, "--seed", "7", "--out", p1, "--quiet")[0] == 0
    assert run_cli(capsys, "portrait", cfg, "--seed", "7", "--out", p2, "--quiet")[0] == 0
    assert run_cli(capsys, "portrait", cfg, "--seed", "8", "--out", p3, "--quiet")[0] == 0
    doc1 = open(p1, "rb").read()
    assert doc1 == open(p2, "rb").read()
    assert doc1 != open(p3, "rb").read()
    assert doc1.startswith(b"<svg")


def test_basins_json(tmp_path, capsys):
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS)
    code, _, err = run_cli(capsys, "basins", cfg)
    # basin probing only makes sense with two attractors
    assert code == 2

    from opensirs import analysis
    pB = analysis.perturb_special_case(analysis.bistable_special_instance(2.0, 4.0, 1.0), 1e-3)
    cfg = write_cfg(tmp_path, pB, name="b.cfg", probe_resolution="5", boundary_samples="8")
    code, out, _ = run_cli(capsys, "basins", cfg)
    assert code == 0
    doc = parse_json(out)
    assert doc["type"] == "BasinReport"
    assert doc["agreement_fraction"] >= 0.99


def test_out_writes_file_and_quiet_suppresses_note(tmp_path, capsys):
    cfg = write_cfg(tmp_path, GENERIC_A_PARAMS)
    out_path = str(tmp_path / "verdict.json")
    code, out, err = run_cli(capsys, "analyze", cfg, "--out", out_path)
    assert code == 0
    assert out == ""
    assert "wrote regime verdict" in err
    code, _, err = run_cli(capsys, "analyze", cfg, "--out", out_path, "--quiet")
    assert code == 0
    assert err == ""
    with open(out_path, encoding="utf-8") as fh:
        assert parse_json(fh.read())["label"] == "A_UniqueGAS"
