import csv
import io
import json

import pytest

from picaso.cli import main
from picaso.reports import KINDS, ReportSpec, UnknownDevice, UnknownKind, make_report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_mac(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "8", "--q", "16", "--seed", "1")
    assert code == 0
    assert "verdict      : MATCH" in out
    assert "cycles mult  : simulated 144  formula 144" in out
    assert "accum 48" in out


def test_simulate_bad_q(capsys):
    code, _, err = run(capsys, "simulate", "--q", "24")
    assert code == 2
    assert "q must be 16*2^k" in err


def test_simulate_gemv_zero_matrix_path(capsys):
    code, out, _ = run(capsys, "simulate", "--workload", "gemv", "--n", "4", "--q", "5",
                       "--k", "3", "--seed", "4")
    assert code == 0 and "MATCH" in out


def test_unknown_report_kind_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["report", "bogus"])
    assert e.value.code == 2


def test_unknown_device(capsys):
    code, _, err = run(capsys, "report", "latency", "--device", "NOPE")
    assert code == 2 and "unknown device" in err


def test_memeff_row(capsys):
    code, out, _ = run(capsys, "report", "memeff", "--n", "4,8,16")
    assert code == 0
    rows = list(csv.DictReader(line for line in io.StringIO(out) if not line.startswith("#")))
    row16 = next(r for r in rows if r["n"] == "16")
    assert row16["CCB"] == "0.500"
    assert row16["COMEFA_A"] == "0.688"
    assert row16["PICASO_F"] == "0.938"
    assert row16["A_MOD"] == "0.750"


def test_memeff_percent(capsys):
    _, out, _ = run(capsys, "report", "memeff", "--n", "16", "--percent")
    assert "93.750" in out


def test_scalability_rows(capsys):
    _, out, _ = run(capsys, "report", "scalability", "--format", "json")
    doc = json.loads(out)
    assert [r["max_pes_k"] for r in doc["rows"]] == \
        ["24K", "32K", "41K", "60K", "23K", "67K", "69K", "86K"]
    assert all(r["provenance"] == "published" for r in doc["rows"])


def test_json_provenance(capsys):
    _, out, _ = run(capsys, "report", "memeff", "--n", "8,16", "--format", "json")
    doc = json.loads(out)
    assert [r["provenance"] for r in doc["rows"]] == ["derived", "published"]


def test_cycle_formulas_report(capsys):
    _, out, _ = run(capsys, "report", "cycle-formulas", "--n", "32", "--q", "128",
                    "--format", "json")
    rows = json.loads(out)["rows"]
    acc = {r["model"]: r for r in rows if r["operation"] == "ACCUM"}
    assert acc["SPAR2"]["cycles"] == 4512
    assert acc["PICASO_F"]["cycles"] == acc["PICASO_F"]["program"] == 259


def test_throughput_notes(capsys):
    _, out, _ = run(capsys, "report", "throughput", "--n", "4,8", "--booth-effective")
    assert "model uncertainty" in out
    assert "PICASO_F/COMEFA_A" in out


def test_latency_flags(capsys):
    _, out, _ = run(capsys, "report", "latency")
    assert "within 15%" in out


def test_catalog_override(tmp_path, capsys):
    cat = tmp_path / "c.json"
    cat.write_text(json.dumps({"devices": [{"id": "TINY", "part": "t", "family": "V7",
                                            "bram_count": 10, "lut_bram_ratio": 1,
                                            "base_bram_freq": 500.0}]}))
    _, out, _ = run(capsys, "report", "scalability", "--catalog", str(cat))
    assert "TINY" in out and "320" in out


def test_assemble(capsys):
    code, out, _ = run(capsys, "assemble", "--op", "mult", "--n", "4")
    assert code == 0
    assert "; cycles=40" in out
    code, out, _ = run(capsys, "assemble", "--op", "accum", "--n", "4", "--pipe", "single-cycle")
    assert code == 0


def test_assemble_bad_q(capsys):
    code, _, _ = run(capsys, "assemble", "--op", "accum", "--q", "20")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["report", "throughput", "--format", "json", "--booth-effective"],
    ["report", "latency"],
    ["dump-state", "--n", "8", "--q", "32", "--seed", "9", "--rows", "0:30"],
    ["simulate", "--n", "6", "--q", "64", "--seed", "3"],
])
def test_byte_identical_runs(tmp_path, argv):
    outs = []
    for i in range(2):
        path = tmp_path / f"out{i}"
        assert main(argv + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0]


def test_report_api_errors():
    with pytest.raises(UnknownKind):
        make_report(ReportSpec("nope"))
    with pytest.raises(UnknownDevice):
        make_report(ReportSpec("latency", device="nope"))
    for kind in KINDS:
        assert make_report(ReportSpec(kind)).rows
