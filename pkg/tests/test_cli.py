import csv
import io
import json
import math

import pytest
import yaml

import xlab
from cli import ConfigError, load_config


def write_config(tmp_path, data, name="config.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def run(tmp_path, *argv):
    out = tmp_path / "out.txt"
    status = xlab.main([*argv, "--out", str(out)])
    return status, out.read_bytes().decode("utf-8") if out.exists() else ""


def test_apply_csv_rows(tmp_path):
    config = write_config(
        tmp_path,
        {
            "specs": [{"p0": 2, "p1": 4}],
            "function": {"atoms": [[1, 1]]},
            "grid": {"t_values": [0.5, 1]},
        },
    )
    status, text = run(tmp_path, "apply", "--config", config, "--format", "csv")
    assert status == 0
    assert text.startswith("t,P,Q,R\r\n")
    rows = list(csv.reader(io.StringIO(text)))[1:]
    values = [[float(v) for v in row] for row in rows]
    assert values[0] == pytest.approx([0.5, 2.0, 0.75683, 2.75683], abs=1e-5)
    assert values[1] == pytest.approx([1.0, 2.0, 0.0, 2.0], abs=1e-12)
    assert rows[1][2] == "0"


def test_apply_json(tmp_path):
    config = write_config(tmp_path, {"specs": [{"p0": 1, "p1": "inf"}], "grid": {"t_values": [0.25]}})
    status, text = run(tmp_path, "apply", "--config", config)
    assert status == 0
    data = json.loads(text)
    assert data["spec"]["p1"] == "inf"
    assert data["rows"][0]["R"] == pytest.approx(1.0 + math.log(4.0))


def test_check_phi(tmp_path):
    config = write_config(tmp_path, {"phi": {"gamma": 1, "log_exponents": [1, 0.5]}, "grid": {"t_points": 100}})
    status, text = run(tmp_path, "check-phi", "--config", config)
    assert status == 0
    data = json.loads(text)
    assert data["passed"]
    assert not data["degenerate"]


def test_check_phi_rejects_negative_gamma(tmp_path):
    config = write_config(tmp_path, {"phi": {"gamma": -1}})
    status, text = run(tmp_path, "check-phi", "--config", config)
    assert status == 2
    assert text == ""


def test_rearrange(tmp_path):
    config = write_config(tmp_path, {"function": {"atoms": [[1, 3], [2, 1]]}})
    status, text = run(tmp_path, "rearrange", "--config", config)
    assert status == 0
    data = json.loads(text)
    assert data["breakpoints"] == [1.0, 4.0]
    assert data["values"] == [2.0, 1.0]
    assert data["total_mass"] == 4.0
    assert data["double_star"]["bounds"][-1] == "inf"


def test_rearrange_csv_from_steps(tmp_path):
    config = write_config(tmp_path, {"function": {"steps": [[1, 1], [2, 3]]}, "output": {"format": "csv"}})
    status, text = run(tmp_path, "rearrange", "--config", config)
    assert status == 0
    assert text == "breakpoint,value\r\n1,3\r\n2,1\r\n"


@pytest.mark.parametrize(
    "norm, expected",
    [
        ({"kind": "lorentz", "p": 2, "q": 1}, 2.0),
        ({"kind": "weak-lorentz", "p": 2}, 1.0),
        ({"kind": "llogl", "alpha": 1}, 2.0),
        ({"kind": "philog", "p": 2, "phi": {"gamma": 1}}, 6.0),
    ],
)
def test_norm(tmp_path, norm, expected):
    config = write_config(tmp_path, {"function": {"atoms": [[1, 1]]}, "norm": norm})
    status, text = run(tmp_path, "norm", "--config", config)
    assert status == 0
    data = json.loads(text)
    assert data["value"] == pytest.approx(expected, rel=1e-10)
    if "from_distribution" in data:
        assert data["from_distribution"] == pytest.approx(expected, rel=1e-10)


def test_verify_converse(tmp_path):
    config = write_config(
        tmp_path,
        {
            "specs": [{"p0": 2, "p1": 4}, {"p0": 2, "p1": 4, "phi": {"gamma": 1}}],
            "family": {"kind": "explicit", "functions": [{"atoms": [[1, 1]]}, {"steps": [[0.5, 1], [1, 3]]}]},
        },
    )
    status, text = run(tmp_path, "verify", "converse", "--config", config)
    assert status == 0
    data = json.loads(text)
    assert data["suite"] == "converse"
    assert data["passed"]
    assert [report["params"]["p"] for report in data["reports"]] == [4.0, 4.0]


def test_verify_csv(tmp_path):
    status, text = run(tmp_path, "verify", "lemma-infimum", "--seed", "3", "--format", "csv")
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 1
    assert rows[0]["suite"] == "lemma-infimum"
    assert rows[0]["passed"] == "True"


def test_verify_precondition_failure_is_a_config_error(tmp_path):
    config = write_config(tmp_path, {"specs": [{"p0": 1, "p1": 4}]})
    status, _ = run(tmp_path, "verify", "forward", "--config", config)
    assert status == 2


def test_unknown_suite(tmp_path):
    status, _ = run(tmp_path, "verify", "no-such-suite")
    assert status == 2


def test_unreadable_config(tmp_path):
    status, _ = run(tmp_path, "norm", "--config", str(tmp_path / "missing.yaml"))
    assert status == 2
    broken = tmp_path / "broken.yaml"
    broken.write_text("specs: [\n", encoding="utf-8")
    status, _ = run(tmp_path, "norm", "--config", str(broken))
    assert status == 2


def test_invalid_spec_in_config(tmp_path):
    config = write_config(tmp_path, {"specs": [{"p0": 4, "p1": 2}]})
    with pytest.raises(ConfigError):
        load_config(config)
    config = write_config(tmp_path, {"specs": [{"p0": 2, "p1": 4, "delta": 1}]})
    with pytest.raises(ConfigError):
        load_config(config)


def test_function_literal_takes_one_form(tmp_path):
    config = write_config(tmp_path, {"function": {"atoms": [[1, 1]], "steps": [[1, 1]]}})
    with pytest.raises(ConfigError):
        load_config(config)


def test_overrides_replace_file_values(tmp_path):
    config = write_config(tmp_path, {"family": {"kind": "staircase", "seed": 1}, "tolerances": {"abs": 1e-9}})
    loaded = load_config(config, {"family": {"seed": 9}, "tolerances": {"rel": 1e-6}})
    assert loaded.family.seed == 9
    assert loaded.family.kind == "staircase"
    assert loaded.tolerances.abs == 1e-9
    assert loaded.tolerances.rel == 1e-6


def test_dump_config_round_trip(tmp_path):
    config = write_config(
        tmp_path,
        {
            "specs": [{"p0": 1.5, "p1": "inf", "phi": {"gamma": 1, "log_exponents": [1]}}],
            "norm": {"kind": "lorentz", "q": "inf"},
            "verify": {"volume": 2.5},
        },
    )
    dumped = tmp_path / "effective.json"
    status = xlab.main(["norm", "--config", config, "--seed", "4", "--dump-config", str(dumped)])
    assert status == 0
    data = json.loads(dumped.read_text(encoding="utf-8"))
    assert data["specs"][0]["p1"] == "inf"
    assert data["family"]["seed"] == 4
    assert load_config(str(dumped)) == load_config(config, {"command": "norm", "family": {"seed": 4}})


@pytest.mark.parametrize("points", [400, 800])
def test_verify_grid_size_reaches_the_report(tmp_path, points):
    config = write_config(
        tmp_path,
        {
            "specs": [{"p0": 2, "p1": 4}],
            "family": {"kind": "staircase", "count": 2, "seed": 5},
            "grid": {"t_points": points},
        },
    )
    status, text = run(tmp_path, "verify", "forward", "--config", config)
    assert status == 0
    assert json.loads(text)["reports"][0]["params"]["t_points"] == points


def test_verify_stability(tmp_path):
    config = write_config(
        tmp_path,
        {"specs": [{"p0": 2, "p1": 4}], "family": {"kind": "staircase", "count": 2}, "grid": {"t_points": 200}},
    )
    status, text = run(tmp_path, "verify", "stability", "--config", config)
    assert status == 0
    report = json.loads(text)["reports"][0]
    assert report["suite"] == "stability"
    assert set(report["details"]["per_suite"]) == {"forward", "remark", "zygmund"}
