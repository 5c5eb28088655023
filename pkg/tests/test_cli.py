import json
from pathlib import Path

import pytest

from vfabric import acceptance
from vfabric.cli import main, read_body
from vfabric.designs.arith import gen_cla
from vfabric.dynlogic import netlist as nlio

PROGRAMS = Path(acceptance.PROGRAM_DIR)


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def manifest(path):
    lines = [l[2:] for l in Path(path).read_text().splitlines() if l.startswith("# ")]
    return dict(l.split(": ", 1) for l in lines)


def test_interconnect_outputs(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "interconnect", "--mode", "cmos", "--param-set", "2", "--n", "1e7",
                           "--out", tmp_path)
    assert code == 0
    body = read_body(tmp_path / "distribution.csv").splitlines()
    assert body[0] == "l_gate_pitches,f_l_count,cumulative_count"
    m = manifest(tmp_path / "distribution.csv")
    assert m["subcommand"] == "interconnect"
    assert "param_set=2" in m["parameters"]
    assert len(m["config_sha256"]) == 16
    summary = read_body(tmp_path / "summary.csv")
    assert "parameter_set,cmos2," in summary
    assert "l_max_global" in summary


def test_interconnect_compare(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "interconnect", "--compare", "--out", tmp_path)
    assert code == 0
    rows = read_body(tmp_path / "comparison.csv").splitlines()[1:]
    longest = {r.split(",")[0]: float(r.split(",")[3]) for r in rows}
    assert 5 <= longest["cmos1"] / longest["skybridge"] <= 15


def test_repeaters_csv_has_totals(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "repeaters", "--mode", "skybridge", "--out", tmp_path)
    assert code == 0
    rows = read_body(tmp_path / "repeaters.csv").splitlines()
    assert rows[0].startswith("tier,l_opt_nm")
    assert rows[-1].startswith("total,")


def test_missing_config_is_usage_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, "interconnect", "--config", tmp_path / "nope.json", "--out", tmp_path)
    assert code == 2
    assert "usage:" in err and "not found" in err


def test_bad_config_value(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fabrics": {"cmos1": {"rent_p": 3}}}))
    code, _, err = run_cli(capsys, "repeaters", "--config", cfg, "--out", tmp_path)
    assert code == 2 and "rent_p" in err


def test_argparse_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["thermal", "--gate-conduction", "0.3"])
    assert exc.value.code == 2


def test_thermal_one_junction(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "thermal", "--gate-conduction", "0", "--hej", "1", "--out", tmp_path)
    assert code == 0
    rows = read_body(tmp_path / "transistors.csv").splitlines()
    assert rows[0] == "transistor,gate,role,hot_K,silicide_K,spacer_K,channel_K,source_K"
    top = float(rows[1].split(",")[3])
    assert top == pytest.approx(400, rel=0.15)
    assert "nodes.csv" in {p.name for p in tmp_path.iterdir()}


def test_thermal_rejects_too_many_junctions(tmp_path, capsys):
    code, _, err = run_cli(capsys, "thermal", "--hej", "5", "--out", tmp_path)
    assert code == 2


def test_simulate(tmp_path, capsys):
    net = tmp_path / "cla4.net"
    nlio.save(gen_cla(4).nl, net)
    stim = tmp_path / "s.csv"
    stim.write_text("a0,a1,a2,a3,b0,b1,b2,b3,cin\n1,0,1,0,1,1,0,0,0\n1,1,1,1,1,0,0,0,1\n")
    code, out, _ = run_cli(capsys, "simulate", net, stim, "--out", tmp_path)
    assert code == 0
    rows = read_body(tmp_path / "outputs.csv").splitlines()
    assert len(rows) == 3
    head = rows[0].split(",")

    def value(row):
        v = dict(zip(head, row.split(",")))
        return sum(int(v[f"s{i}"]) << i for i in range(4)) + (int(v[[h for h in head if h.startswith("c4")][0]]) << 4)
    assert [value(r) for r in rows[1:]] == [8, 17]
    assert read_body(tmp_path / "trace.csv").startswith("slot,net,value")


def test_simulate_single_rail_and_bad_stimulus(tmp_path, capsys):
    net = tmp_path / "bad.net"
    net.write_text("stages 2\ninput a\ngate y 0 a\ngate z 1 y\noutput z\n")
    stim = tmp_path / "s.csv"
    stim.write_text("a\n1\n")
    code, out, _ = run_cli(capsys, "simulate", net, stim, "--rail", "single", "--slots", "12", "--out", tmp_path)
    assert code == 0 and "z=1" in out
    bad = tmp_path / "bad_stim.csv"
    bad.write_text("a\n2\n")
    code, _, err = run_cli(capsys, "simulate", net, bad, "--out", tmp_path)
    assert code == 2 and "0 or 1" in err


def test_wisp_run_matches_reference(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "wisp", "run", PROGRAMS / "add.asm", "--out", tmp_path)
    assert code == 0
    assert "reference interpreter: match" in out
    assert "R0 =" in out and "cycles =" in out


def test_wisp_assemble_and_errors(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "wisp", "assemble", PROGRAMS / "add.asm", "--out", tmp_path)
    assert code == 0 and len(out.splitlines()) == 16
    rom = tmp_path / "p.rom"
    rom.write_text(out)
    code, out2, _ = run_cli(capsys, "wisp", "disassemble", rom, "--out", tmp_path)
    assert code == 0 and out2.startswith("MOVI")
    bad = tmp_path / "bad.asm"
    bad.write_text("NOP\nFOO R1\n")
    code, _, err = run_cli(capsys, "wisp", "run", bad, "--out", tmp_path)
    assert code == 2 and "line 2" in err


def test_layout_outputs(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "layout", "--design", "cla4", "--calibrate", "--sweep", "aspect_ratio",
                           "--values", "27.125", "54.25", "--out", tmp_path)
    assert code == 0
    summary = dict(r.split(",") for r in read_body(tmp_path / "layout_summary.csv").splitlines()[1:])
    assert float(summary["area_um2"]) == pytest.approx(0.76)
    grid = (tmp_path / "layout_grid.txt").read_text().splitlines()
    assert len(grid) == int(summary["y_pitches"]) and len(grid[0]) == int(summary["x_pitches"])
    assert len(read_body(tmp_path / "sweep.csv").splitlines()) == 3


def test_layout_sweep_needs_values(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "layout", "--sweep", "spacing", "--out", tmp_path)
    assert code == 2


def test_bodies_are_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        run_cli(capsys, "thermal", "--hej", "2", "--out", tmp_path / d)
        run_cli(capsys, "layout", "--design", "wisp4", "--out", tmp_path / d)
    for name in ("nodes.csv", "transistors.csv", "layout_summary.csv"):
        assert read_body(tmp_path / "a" / name) == read_body(tmp_path / "b" / name)
    assert (tmp_path / "a" / "layout_grid.txt").read_bytes() == (tmp_path / "b" / "layout_grid.txt").read_bytes()


def test_accept_reports_every_criterion(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "accept", "--out", tmp_path)
    crits = acceptance.run_all()
    failed = [c.number for c in crits if not c.passed]
    assert code == (1 if failed else 0)
    for c in crits:
        assert f"{c.number:2d}. {c.title}" in out
    body = read_body(tmp_path / "acceptance.csv")
    assert body == acceptance.render(crits)
