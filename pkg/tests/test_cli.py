from __future__ import annotations

import csv
import io
import json

import pytest

from idos.cli import main, simulate_channel
from idos.constructions import make_spec


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "a.json"
    assert main(["construct", "a", "4", "2", "1", "2", "--out", str(path)]) == 0
    return path


def test_construct_worked_example(spec_file):
    obj = json.loads(spec_file.read_text())
    assert obj["degree"] == 37
    m1, m0 = obj["exponent_matrices"]
    assert m0["entries"] == [0, 0, 1, 2, 2, 4, 3, 6]
    assert m1["entries"] == [6, 3, 4, 2, 2, 1, 0, 0]


def test_construct_flag_form(tmp_path):
    out = tmp_path / "b.json"
    assert main(["construct", "--construction", "b", "--n", "2", "--k", "1", "--m", "1",
                 "--tau", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["degree"] == 17


def test_construct_with_modulus_file(tmp_path):
    mod = tmp_path / "mod.json"
    mod.write_text("[3, 1, 0]")
    out = tmp_path / "a.json"
    assert main(["construct", "a", "2", "1", "1", "1", "--modulus", str(mod), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["modulus"] == [3, 1, 0]


def test_verify_exit_codes(tmp_path, spec_file, capsys):
    b = tmp_path / "b.json"
    main(["construct", "b", "2", "1", "1", "1", "--out", str(b)])
    assert main(["verify", "--spec", str(b), "--mode", "both"]) == 0
    assert main(["verify", "--spec", str(spec_file)]) == 1
    assert main(["verify", "--spec", str(spec_file), "--max-cases", "10"]) == 2


def test_usage_and_io_errors(tmp_path):
    assert main([]) == 64
    assert main(["frobnicate"]) == 64
    assert main(["verify"]) == 64
    assert main(["construct", "a", "4", "4", "1", "1"]) == 64
    assert main(["verify", "--spec", str(tmp_path / "missing.json")]) == 74


def test_domperm(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"rows": 2, "cols": 2, "entries": [0, 0, 1, 2]}))
    assert main(["domperm", "--matrix", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["sigma_star"] == [1, 2] and out["dominant_sum"] == 2
    assert main(["domperm", "--matrix", str(path), "--partition", "2"]) == 0
    # each 1-column part wants row 2, so the decomposition cannot certify
    assert main(["domperm", "--matrix", str(path), "--partition", "1,1"]) == 1
    path.write_text(json.dumps({"rows": 2, "cols": 2, "entries": [0, 0, 0, 0]}))
    assert main(["domperm", "--matrix", str(path)]) == 1


def test_encode_decode_round_trip(tmp_path, spec_file, capsys):
    spec, ctx = make_spec("A", 4, 2, 1, 2)
    msgs = [[ctx.to_hex(3 * t + q) for q in range(2)] for t in range(1, 6)]
    mfile = tmp_path / "msgs.json"
    mfile.write_text(json.dumps(msgs))
    trace = tmp_path / "trace.jsonl"
    assert main(["encode", "--spec", str(spec_file), "--messages", str(mfile), "--out", str(trace)]) == 0
    lines = [json.loads(l) for l in trace.read_text().splitlines()]
    assert [l["t"] for l in lines] == [1, 2, 3, 4, 5]
    # slot 1 fully erased, slot 3 keeps a single symbol
    received = []
    for l in lines:
        keep = {1: [], 3: [2]}.get(l["t"], [0, 1, 2, 3])
        received.append({"t": l["t"], "received": [{"idx": j + 1, "val": l["sent"][j]} for j in keep]})
    trace.write_text("".join(json.dumps(r) + "\n" for r in received))
    assert main(["decode", "--spec", str(spec_file), "--trace", str(trace)]) == 0
    events = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    got = {}
    for e in events:
        assert e["event"] == "recovered"
        got.update(zip(e["slots"], e["messages"]))
    assert [got[t] for t in range(1, 6)] == msgs


def test_simulate_trivial_channels():
    spec, ctx = make_spec("A", 4, 2, 1, 2)
    clean = simulate_channel(spec, 0.0, 50, 1, ctx)
    assert clean.recovered_windows == clean.windows_completed == 50
    assert clean.max_observed_delay == 1 and not any(clean.violations.values())
    dead = simulate_channel(spec, 1.0, 20, 1, ctx)
    assert dead.recovered_windows == 0 and dead.violations["DebtExceeded"] >= 1
    assert dead.windows_completed == 0


def test_simulate_csv_matches_json(tmp_path, spec_file, capsys):
    args = ["simulate", "--spec", str(spec_file), "--epsilon", "0.3", "--slots", "300", "--seed", "9"]
    main(args)
    js = json.loads(capsys.readouterr().out)
    main(args + ["--format", "csv"])
    (row,) = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    for key, val in js.items():
        if key == "violations":
            for kind, count in val.items():
                assert int(row[f"violations_{kind}"]) == count
        else:
            assert str(val) == row[key]
