import json
import os
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from jewel import cli, io
from jewel import povm as pv
from jewel import witness as wt
from jewel.linalg import SIGMA_X, SIGMA_Y
from jewel.povm import MeasurementSet

GOLDEN = Path(__file__).parent / "golden"
I2 = np.eye(2)

# name -> argv; inputs are created by the ``workdir`` fixture
TRANSCRIPTS = {
    "bounds_qubit_pair": ["bounds", "--g", "2", "--d", "2", "--k", "2,2"],
    "bounds_json": ["bounds", "--g", "3", "--d", "2", "--k", "2,2,2", "--json"],
    "robustness_mub2": ["compat", "robustness", "mub2.json", "--model", "balanced"],
    "robustness_direction": ["compat", "robustness", "mub2.json", "--direction", "1,0.5"],
    "check_mub2": ["compat", "check", "mub2.json"],
    "check_half": ["compat", "check", "half.json"],
    "validate_mub2": ["validate", "mub2.json"],
    "validate_broken": ["validate", "broken.json"],
    "zhu_mub3": ["zhu", "mub3.json"],
    "zhu_half": ["zhu", "half.json"],
    "witness_check_planar": ["witness", "check", "planar2.json"],
    "witness_check_gap": ["witness", "check", "gap.json", "--method", "both"],
    "witness_apply_pair": ["witness", "apply", "planar2.json", "pair.json"],
    "witness_apply_half": ["witness", "apply", "planar2.json", "half.json"],
    "jewel_vertices_3": ["jewel", "vertices", "--k", "3"],
    "cuboid_vertices_2_3": ["cuboid", "vertices", "--k", "2,3"],
    "scan_mub2": ["region", "scan", "mub2.json", "--model", "balanced", "--directions", "2", "--seed", "3"],
}


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    io.write_json("mub2.json", pv.mub_povms(2, 2).to_json())
    io.write_json("mub3.json", pv.mub_povms(3, 2).to_json())
    half = pv.apply_noise(pv.mub_povms(2, 2), pv.NoiseModel("balanced", (0.5, 0.5)))
    io.write_json("half.json", half.to_json())
    pair = MeasurementSet((pv.Povm(np.array([(I2 + SIGMA_Y) / 2, (I2 - SIGMA_Y) / 2])),
                           pv.Povm(np.array([(I2 - SIGMA_X) / 2, (I2 + SIGMA_X) / 2]))))
    io.write_json("pair.json", pair.to_json())
    io.write_json("planar2.json", wt.planar_witness(2).to_json())
    io.write_json("gap.json", wt.binary([SIGMA_X, SIGMA_Y]).scaled(0.7).to_json())
    doc = pv.mub_povms(2, 2).to_json()
    doc["povms"][1]["effects"][0] = [[[1, 0]]]
    io.write_json("broken.json", doc)
    return tmp_path


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def transcript(argv, code, out, err):
    err = "".join(f"! {line}\n" for line in err.splitlines())
    return f"$ jewel {' '.join(argv)}\n{out}{err}[exit {code}]\n"


NUMBER = re.compile(r"-?\d+\.\d+(?:e[-+]?\d+)?")


def same_transcript(got, want):
    """Equal text, with numbers allowed to move in the last few digits."""
    if NUMBER.sub("#", got) != NUMBER.sub("#", want):
        return False
    pairs = zip(NUMBER.findall(got), NUMBER.findall(want))
    return all(abs(float(a) - float(b)) <= 1e-9 * (1 + abs(float(b))) for a, b in pairs)


@pytest.mark.parametrize("name", sorted(TRANSCRIPTS))
def test_golden_transcripts(name, workdir, capsys):
    argv = TRANSCRIPTS[name]
    text = transcript(argv, *run(argv, capsys))
    path = GOLDEN / f"{name}.txt"
    if os.environ.get("JEWEL_REGEN_GOLDEN"):
        path.write_text(text)
    assert same_transcript(text, path.read_text()), text


def test_spec_examples(workdir, capsys):
    code, out, _ = run(["bounds", "--g", "2", "--d", "2", "--k", "2,2"], capsys)
    assert code == 0 and "0.707107" in out and "cloning_symmetric" in out
    code, out, _ = run(["compat", "robustness", "mub2.json", "--model", "balanced"], capsys)
    assert code == 0 and out.startswith("t* = 0.70711\n")
    code, out, _ = run(["jewel", "vertices", "--k", "3"], capsys)
    assert out.splitlines()[1:] == ["-1.5,0", "0,-1.5", "1.5,1.5"]


@pytest.mark.parametrize("argv, expected", [
    (["compat", "check", "half.json"], 0),
    (["compat", "check", "mub2.json"], 1),
    (["validate", "broken.json"], 2),
    (["validate", "missing.json"], 2),
    (["compat", "robustness", "mub2.json", "--direction", "1,-1"], 2),
    (["compat", "robustness", "mub2.json", "--direction", "1,1,1"], 2),
    (["witness", "apply", "gap.json", "half.json"], 0),
    (["witness", "apply", "planar2.json", "mub3.json"], 2),
    (["region", "scan", "mub2.json", "--directions", "0"], 2),
    (["gen", "random", "--g", "3", "--d", "2", "--k", "2,2", "--seed", "1"], 2),
])
def test_exit_codes(argv, expected, workdir, capsys):
    assert run(argv, capsys)[0] == expected


def test_usage_errors_exit_two(capsys):
    for argv in ([], ["bounds", "--g", "2", "--d", "2", "--k", "x"], ["compat"], ["nope"]):
        with pytest.raises(SystemExit) as err:
            cli.main(argv)
        assert err.value.code == 2
    capsys.readouterr()


def test_decode_error_names_path(workdir, capsys):
    code, _, err = run(["validate", "broken.json"], capsys)
    assert code == 2 and "$.povms[1].effects[0]" in err


def test_numerical_failure_exit_three(workdir, capsys, monkeypatch):
    from jewel import compat
    from jewel.errors import NumericalError

    def boom(*args, **kwargs):
        raise NumericalError("step length collapsed")

    monkeypatch.setattr(compat, "joint_feasibility", boom)
    code, _, err = run(["compat", "check", "half.json"], capsys)
    assert code == 3 and "numerical failure" in err


def test_json_round_trip_is_byte_stable(workdir, capsys):
    for name in ("mub2.json", "half.json", "planar2.json", "gap.json"):
        text = Path(name).read_text()
        assert io.dumps(io.loads(text)) + "\n" == text
    assert run(["mub", "--d", "3", "--count", "3", "--out", "m.json"], capsys)[0] == 0
    doc = io.read_json("m.json")
    assert io.dumps(pv.MeasurementSet.from_json(doc).to_json()) == io.dumps(doc)
    code, out, _ = run(["bounds", "--g", "2", "--d", "3", "--k", "3,3", "--json"], capsys)
    assert io.dumps(io.loads(out)) + "\n" == out


def test_gen_random_is_seeded(workdir, capsys):
    argv = ["gen", "random", "--g", "2", "--d", "3", "--k", "3", "--seed", "42"]
    run(argv + ["--out", "a.json"], capsys)
    _, _, err = run(argv + ["--out", "b.json"], capsys)
    assert "seed=42" in err
    assert Path("a.json").read_bytes() == Path("b.json").read_bytes()
    mset = pv.MeasurementSet.from_json(io.read_json("a.json"))
    assert mset.shape == (3, 3) and mset.validate().ok
    assert run(["validate", "a.json"], capsys)[0] == 0


@pytest.mark.parametrize("n", [1, 4])
def test_scan_row_count(n, workdir, capsys):
    code, _, _ = run(["region", "scan", "mub2.json", "--directions", str(n), "--out", "s.csv"], capsys)
    lines = Path("s.csv").read_text().splitlines()
    assert code == 0 and lines[0].startswith("# seed=0")
    assert len(lines) - 2 == n + 2 + 1


def test_scan_examples(workdir, capsys):
    io.write_json("single.json", pv.random_set(3, (3,), 0).to_json())
    run(["region", "scan", "single.json", "--directions", "2", "--out", "one.csv"], capsys)
    rows = Path("one.csv").read_text().splitlines()[2:]
    assert len(rows) == 4
    assert all(float(r.split(",")[3]) == pytest.approx(1, abs=1e-7) for r in rows)

    run(["region", "scan", "mub2.json", "--directions", "1", "--out", "zx.csv"], capsys)
    rows = [r.split(",") for r in Path("zx.csv").read_text().splitlines()[2:]]
    by_kind = {}
    for r in rows:
        by_kind.setdefault(r[1], []).append(r)
    for r in by_kind["axis"]:
        assert float(r[4]) == pytest.approx(1, abs=1e-7)
    (sym,) = by_kind["symmetric"]
    assert [float(x) for x in sym[5:7]] == pytest.approx([0.7071, 0.7071], abs=1e-4)


def test_module_entry_point(workdir):
    res = subprocess.run([sys.executable, "-m", "jewel", "jewel", "vertices", "--k", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout == "x1\n-1\n1\n"


def test_check_json_output(workdir, capsys):
    code, out, _ = run(["compat", "check", "half.json", "--emit-joint"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["compatible"] is True and "joint" in doc
