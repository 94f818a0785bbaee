import json
import subprocess
import sys

import jsonschema
import pytest

from soblab.cli import (
    EXIT_LABEL,
    EXIT_OK,
    EXIT_UNSUPPORTED,
    EXIT_USAGE,
    main,
)
from soblab.output import load_schema


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def validate(text, schema):
    doc = json.loads(text)
    jsonschema.validate(doc, load_schema(schema))
    return doc


def test_classify_yes(capsys):
    code, out, _ = run(capsys, "classify", "--dim", "1", "--source", "1/2,2", "--target", "1/4,2",
                       "--domain", "rn")
    assert code == EXIT_OK
    doc = validate(out, "verdict")
    assert doc["continuous"] == "yes" and doc["compact"] == "not-applicable"


def test_classify_bounded_compact(capsys):
    code, out, _ = run(capsys, "classify", "--dim", "2", "--source", "1/2,2", "--target", "1/4,2",
                       "--domain", "bounded")
    assert code == EXIT_OK
    assert validate(out, "verdict")["compact"] == "yes"


def test_classify_unsupported(capsys):
    code, out, err = run(capsys, "classify", "--dim", "1", "--source", "1,1", "--target", "1/2,2",
                         "--domain", "bounded")
    assert code == EXIT_UNSUPPORTED
    assert validate(out, "verdict")["continuous"] == "unsupported"
    assert "unsupported" in err


@pytest.mark.parametrize("argv", [
    ["classify", "--dim", "1", "--source", "1/2", "--target", "1/4,2", "--domain", "rn"],
    ["classify", "--dim", "1", "--source", "1/2,2", "--target", "1/4,2", "--domain", "torus"],
    ["classify", "--dim", "1", "--source", "3/2,2", "--target", "1/4,2", "--domain", "rn"],
    ["norm", "--fn", "tent", "--domain", "box:0"],
    ["norm", "--fn", "tent", "--dim", "2"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_unknown_label(capsys):
    code, _, err = run(capsys, "norm", "--fn", "nope")
    assert code == EXIT_LABEL and "nope" in err


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    code, _, err = run(capsys, "--config", str(cfg), "classify", "--dim", "1", "--source", "1/2,2",
                       "--target", "1/4,2", "--domain", "rn")
    assert code == EXIT_USAGE and "config" in err
    code, _, _ = run(capsys, "--config", str(tmp_path / "missing.cfg"), "classify", "--dim", "1",
                     "--source", "1/2,2", "--target", "1/4,2", "--domain", "rn")
    assert code == EXIT_USAGE


def test_region_writes_grid(capsys, tmp_path):
    code, out, _ = run(capsys, "region", "--dim", "1", "--source", "1/2,2", "--domain", "rn",
                       "--resolution", "2", "--out", str(tmp_path))
    assert code == EXIT_OK
    paths = out.split()
    assert len(paths) == 2
    csv_lines = (tmp_path / "region-whole-space-continuous.csv").read_text().splitlines()
    assert len(csv_lines) == 5


def test_region_respects_formats(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"formats=svg\noutput_dir={tmp_path / 'o'}\n")
    code, out, _ = run(capsys, "--config", str(cfg), "region", "--dim", "1", "--source", "1/2,2",
                       "--domain", "bounded", "--mode", "compact", "--resolution", "3")
    assert code == EXIT_OK
    assert out.strip().endswith(".svg") and len(out.split()) == 1


def test_norm_tent(capsys):
    code, out, _ = run(capsys, "norm", "--fn", "tent", "--s", "1/2", "--p", "2", "--kind",
                       "gagliardo")
    assert code == EXIT_OK
    doc = validate(out, "norm_report")
    assert doc["value"] == pytest.approx(0.9394372787, rel=1e-9)
    assert doc["index"] == {"N": 1, "s": "1/2", "p": "2"}


def test_norm_box_domain(capsys):
    code, out, _ = run(capsys, "norm", "--fn", "tent", "--kind", "lp", "--p", "1",
                       "--domain", "box:-0.5:0.5")
    assert code == EXIT_OK
    assert validate(out, "norm_report")["value"] == pytest.approx(0.75, rel=1e-9)


def test_scaling(capsys):
    code, out, _ = run(capsys, "scaling", "--fn", "tent", "--s", "1/2", "--p", "2", "--gamma", "1",
                       "--beta", "1", "--eps", "1,0.5")
    assert code == EXIT_OK
    assert validate(out, "experiment_report")["passed"]


def test_counterexample_rate(capsys):
    code, out, _ = run(capsys, "counterexample", "--dim", "1", "--source", "1/2,2", "--target",
                       "1/2,6", "--domain", "rn")
    assert code == EXIT_OK
    doc = validate(out, "experiment_report")
    assert doc["fitted_exponent"] == pytest.approx(-1 / 3, rel=0.05)


def test_counterexample_for_an_embedding(capsys):
    code, _, err = run(capsys, "counterexample", "--dim", "1", "--source", "1/2,2", "--target",
                       "1/4,2", "--domain", "rn")
    assert code == EXIT_UNSUPPORTED and "no counterexample" in err


def test_interpolate(capsys):
    code, out, _ = run(capsys, "interpolate", "--fn", "tent", "--first", "0,2", "--second", "4/5,2")
    assert code == EXIT_OK
    doc = validate(out, "experiment_report")
    assert doc["measured"][0] == 1.0 and doc["measured"][-1] == 1.0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "soblab.cli", "classify", "--dim", "1",
                           "--source", "1/2,2", "--target", "1/2,6", "--domain", "rn"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["continuous"] == "no"
