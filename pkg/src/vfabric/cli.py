"""Command-line front end.

Every CSV written starts with ``#`` manifest lines (subcommand, config,
output directory, arguments, tool version, config hash) followed by a
header row whose column names carry units.  Exit codes: 0 success,
1 analysis failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from . import acceptance as acc
from . import repeater as rp
from . import thermal as th
from .designs import isa
from .designs.arith import ClaSpec, gen_cla, gen_multiplier4
from .designs.wisp import gen_wisp4, run_wisp
from .dynlogic import netlist as nlio
from .dynlogic.sim import ReadFloatingError, micro_pipeline, run
from .layout import FanInError, area, calibrate, place, sensitivity_sweep
from .params import ConfigError, dump_config, load_config

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def config_hash(bundle) -> str:
    text = json.dumps(dump_config(bundle), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class Outputs:
    """Writes result files under one directory, each with the run manifest."""

    def __init__(self, args, bundle):
        self.dir = Path(args.out)
        self.manifest = {
            "subcommand": args.command,
            "config": args.config or "<built-in defaults>",
            "out": str(self.dir),
            "parameters": " ".join(f"{k}={v}" for k, v in sorted(vars(args).items())
                                   if k not in ("command", "config", "out", "func")),
            "version": __version__,
            "config_sha256": config_hash(bundle),
        }
        self.written: list[Path] = []

    def _open(self, name: str):
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / name
        self.written.append(path)
        return path

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self._open(name)
        with open(path, "w", newline="") as fh:
            for k, v in self.manifest.items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        return path

    def text(self, name: str, body: str) -> Path:
        path = self._open(name)
        path.write_text(body)
        return path


def read_body(path) -> str:
    """CSV content without the manifest lines."""
    return "".join(line for line in Path(path).read_text().splitlines(True) if not line.startswith("#"))


def _fmt(x: float) -> str:
    return f"{x:.10g}"


# ---- interconnect / repeaters

def param_set(args) -> str:
    if args.mode == "skybridge":
        return "skybridge"
    return f"cmos{args.param_set}"


def _analyse(bundle, mode: str, name: str, n):
    return rp.analyse(bundle, name, mode, None if n is None else int(float(n)))


def _repeater_rows(rep, bounds) -> list[list]:
    rows = [[t.tier, _fmt(t.l_opt), _fmt(t.s_opt), t.l_max, _fmt(t.boundary_delay), _fmt(t.repeaters)]
            for t in rep.tiers]
    rows.append(["total", "", "", bounds.l_max_global, "", _fmt(rep.total)])
    return rows


REPEATER_HEADER = ["tier", "l_opt_nm", "s_opt", "l_max_gate_pitches", "boundary_delay_s", "repeaters"]


def cmd_interconnect(args, bundle, out: Outputs) -> int:
    name = param_set(args)
    fab, dist, bounds, rep = _analyse(bundle, args.mode, name, args.n)
    cum = dist.cumulative
    out.csv("distribution.csv", ["l_gate_pitches", "f_l_count", "cumulative_count"],
            ([int(l), _fmt(f), _fmt(c)] for l, f, c in zip(dist.lengths, dist.counts, cum)))
    summary = [
        ["parameter_set", name, ""],
        ["n_gates", fab.n_gates, "gates"],
        ["gamma", _fmt(dist.gamma), "1"],
        ["i_total", _fmt(dist.i_total), "interconnects"],
        ["l_max_array", dist.l_max, "gate pitches"],
        ["longest_f_ge_1", dist.longest(1.0), "gate pitches"],
        ["longest_f_ge_1_physical", _fmt(dist.longest(1.0) * fab.gate_pitch_h), "nm"],
    ]
    summary += [[f"l_max_{k}", v, "gate pitches"] for k, v in bounds.as_dict().items()]
    out.csv("summary.csv", ["quantity", "value", "unit"], summary)
    out.csv("repeaters.csv", REPEATER_HEADER, _repeater_rows(rep, bounds))
    print(f"{name}: I_total={dist.i_total:.6g} longest(f>=1)={dist.longest(1.0)} pitches "
          f"({dist.longest(1.0) * fab.gate_pitch_h / 1e3:.1f} um), repeaters={rep.total:.6g}")
    if args.compare:
        rows = []
        for mode, ps in (("skybridge", "skybridge"), ("cmos", "cmos1"), ("cmos", "cmos2")):
            f2, d2, b2, r2 = _analyse(bundle, mode, ps, args.n)
            l = d2.longest(1.0)
            rows.append([ps, mode, l, _fmt(l * f2.gate_pitch_h), b2.l_max_local, b2.l_max_semi_global, _fmt(r2.total)])
        out.csv("comparison.csv", ["parameter_set", "mode", "longest_gate_pitches", "longest_nm",
                                   "l_max_local", "l_max_semi_global", "repeaters"], rows)
        for r in rows:
            print(f"  {r[0]:<10} longest={r[2]:>6} pitches  repeaters={float(r[6]):.4g}")
    return EXIT_OK


def cmd_repeaters(args, bundle, out: Outputs) -> int:
    name = param_set(args)
    _, _, bounds, rep = _analyse(bundle, args.mode, name, args.n)
    out.csv("repeaters.csv", REPEATER_HEADER, _repeater_rows(rep, bounds))
    for t in rep.tiers:
        print(f"{t.tier:<12} l_opt={t.l_opt:10.1f} nm  s_opt={t.s_opt:7.2f}  L_max={t.l_max:>6}  R={t.repeaters:.6g}")
    print(f"{'total':<12} {rep.total:.6g}")
    return EXIT_OK


# ---- thermal

def cmd_thermal(args, bundle, out: Outputs) -> int:
    eva = th.eva_positions(bundle)
    if args.hej_positions is not None:
        hej = tuple(args.hej_positions)
    else:
        if args.hej > len(eva):
            raise UsageError(f"--hej {args.hej}: the stack has only {len(eva)} evaluate transistors")
        hej = tuple(eva[: args.hej])
    # junction pillars share the supply rails, so HEJs bring the power pillars with them unless disabled
    hdpp = args.hdpp if args.hdpp is not None else bool(hej)
    sc = th.Scenario(args.gate_conduction, hdpp, hej, args.bridge_pitches)
    sol = th.run_scenario(bundle, sc)
    out.csv("nodes.csv", ["node", "label", "temperature_K"],
            ([i, lab, _fmt(t)] for i, (lab, t) in enumerate(zip(sol.labels, sol.temperatures))))
    regions = ("hot", "silicide", "spacer", "channel", "source")
    out.csv("transistors.csv", ["transistor", "gate", "role"] + [f"{r}_K" for r in regions],
            ([t["index"], t["gate"], t["role"]] + [_fmt(t[r]) for r in regions] for t in sol.transistors))
    print(f"gate_conduction={args.gate_conduction} hdpp={'on' if hdpp else 'off'} hej={list(hej) or 'none'}")
    print(f"peak {sol.peak:.1f} K  average {sol.average:.1f} K")
    for p in hej:
        print(f"  T{p} (HEJ) {sol.transistors[p]['hot']:.1f} K")
    return EXIT_OK


# ---- simulate

def read_stimulus(path) -> list[dict[str, int]]:
    """CSV with one column per primary input and one row per wave (0/1)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise UsageError(f"{path}: empty stimulus file")
    header = [h.strip() for h in rows[0]]
    waves = []
    for k, r in enumerate(rows[1:], 2):
        if len(r) != len(header) or any(v.strip() not in ("0", "1") for v in r):
            raise UsageError(f"{path}:{k}: expected {len(header)} values of 0 or 1")
        waves.append({h: int(v) for h, v in zip(header, r)})
    return waves


def cmd_simulate(args, bundle, out: Outputs) -> int:
    nl = nlio.load(args.netlist)
    waves = read_stimulus(args.stimulus)
    sch = micro_pipeline(nl.n_stages, rail=args.rail, reset_hold=args.reset_hold)
    try:
        trace = run(nl, sch, waves, slots=args.slots)
    except ReadFloatingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    path = out._open("trace.csv")
    with open(path, "w", newline="") as fh:
        for k, v in out.manifest.items():
            fh.write(f"# {k}: {v}\n")
        trace.write_rows(csv.writer(fh))
    names = [nl.nets[o] for o in nl.outputs]
    rows = []
    n = min([len(trace.samples(o)) for o in names] + [len(waves)])
    for k in range(n):
        rows.append([k, trace.samples(names[0])[k][0]] + [int(trace.samples(o)[k][1][0]) for o in names])
    out.csv("outputs.csv", ["wave", "slot"] + names, rows)
    for r in rows:
        print(f"wave {r[0]}: " + " ".join(f"{o}={v}" for o, v in zip(names, r[2:])))
    return EXIT_OK


# ---- wisp

def _program(path: str) -> list[int]:
    text = Path(path).read_text()
    if path.endswith(".rom"):
        return isa.read_rom_image(text)
    return isa.assemble(text)


def cmd_wisp(args, bundle, out: Outputs) -> int:
    words = _program(args.program)
    if args.action == "assemble":
        sys.stdout.write(isa.rom_image(words))
        return EXIT_OK
    if args.action == "disassemble":
        sys.stdout.write(isa.disassemble(words))
        return EXIT_OK
    for w, r, reg in isa.hazards([isa.decode(x) for x in words]):
        print(f"warning: instruction {r} reads R{reg} written by instruction {w} "
              f"fewer than {isa.WRITEBACK_DISTANCE} cycles earlier", file=sys.stderr)
    res = run_wisp(words, args.cycles, keep_trace=args.trace)
    ref = isa.wisp_reference(words, args.cycles)
    print(res.state.dump())
    print(f"PC = {res.state.pc}")
    print(f"cycles = {res.slots // 3} (fetch {args.cycles}, first retirement at cycle {res.fill_cycles})")
    print(f"retired = {res.state.retired}")
    if res.debug_products:
        print(f"last product = {res.debug_products[-1]:08b}")
    out.csv("wisp_state.csv", ["register", "value"],
            [[f"R{i}", v] for i, v in enumerate(res.state.regs)] + [["PC", res.state.pc]])
    if res.trace is not None:
        path = out._open("wisp_trace.csv")
        with open(path, "w", newline="") as fh:
            res.trace.write_rows(csv.writer(fh))
    same = (res.state.regs, res.state.pc) == (ref.regs, ref.pc)
    print("reference interpreter: " + ("match" if same else "MISMATCH"))
    return EXIT_OK if same else EXIT_FAIL


# ---- layout

DESIGNS = {
    "cla4": lambda: gen_cla(4).nl,
    "cla8": lambda: gen_cla(8).nl,
    "cla16": lambda: gen_cla(ClaSpec(16, max_fan_in=8)).nl,
    "mult4": lambda: gen_multiplier4().nl,
    "wisp4": lambda: gen_wisp4(()).nl,
}


def cmd_layout(args, bundle, out: Outputs) -> int:
    nl = DESIGNS[args.design]() if args.design in DESIGNS else nlio.load(args.design)
    rules = bundle.layout
    if args.calibrate is not None:
        rules = calibrate(DESIGNS["cla4"](), rules, args.calibrate)
    plan = place(nl, rules)
    a = area(plan, rules)
    s = plan.summary()
    rows = [[k, v] for k, v in s.items()]
    rows += [["overhead_factor", _fmt(rules.overhead_factor)], ["area_um2", _fmt(a)]]
    out.csv("layout_summary.csv", ["quantity", "value"], rows)
    out.text("layout_grid.txt", plan.dump_grid())
    print(f"{args.design}: {s['terms']} terms, {s['logic_nanowires']} logic + {s['signal_nanowires']} signal "
          f"nanowires, {s['x_pitches']}x{s['y_pitches']} pitches, {a:.3f} um^2")
    if args.sweep:
        if not args.values:
            raise UsageError("--sweep needs --values")
        sweep = sensitivity_sweep(nl, rules, args.sweep, args.values)
        out.csv("sweep.csv", ["axis", "value", "pitch_nm", "gates_per_nanowire", "logic_nanowires",
                              "area_um2", "area_linear_um2", "ratio", "ratio_linear"],
                ([r.axis, _fmt(r.value), _fmt(r.pitch), r.gates_per_nanowire, r.logic_nanowires,
                  _fmt(r.area), _fmt(r.area_linear), _fmt(r.ratio), _fmt(r.ratio_linear)] for r in sweep))
        for r in sweep:
            print(f"  {r.axis}={r.value:g}: {r.area:.3f} um^2 (x{r.ratio:.3f}, linear x{r.ratio_linear:.3f})")
    return EXIT_OK


# ---- accept

def cmd_accept(args, bundle, out: Outputs) -> int:
    crits = acc.run_all(bundle)
    print("\n".join(acc.summary_lines(crits)))
    body = acc.render(crits)
    path = out._open("acceptance.csv")
    with open(path, "w") as fh:
        for k, v in out.manifest.items():
            fh.write(f"# {k}: {v}\n")
        fh.write(body)
    failed = [c for c in crits if not c.passed]
    if failed:
        print("failed criteria: " + ", ".join(f"{c.number} ({c.title})" for c in failed))
        return EXIT_FAIL
    print("all criteria pass")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vfabric", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration overriding the built-in defaults")
    common.add_argument("--out", default="vfabric-out", help="output directory (default: %(default)s)")
    sub = p.add_subparsers(dest="command", required=True)

    def wiring(sp):
        sp.add_argument("--mode", choices=("cmos", "skybridge"), default="skybridge")
        sp.add_argument("--param-set", choices=("1", "2"), default="1", help="CMOS Rent parameter set")
        sp.add_argument("--n", help="gate count, e.g. 1e7 (default from config)")

    sp = sub.add_parser("interconnect", parents=[common], help="wire-length distribution and tier summary")
    wiring(sp)
    sp.add_argument("--compare", action="store_true", help="also tabulate all parameter sets side by side")
    sp.set_defaults(func=cmd_interconnect)

    sp = sub.add_parser("repeaters", parents=[common], help="optimal repeaters per tier")
    wiring(sp)
    sp.set_defaults(func=cmd_repeaters)

    sp = sub.add_parser("thermal", parents=[common], help="steady-state temperatures of one logic nanowire")
    sp.add_argument("--gate-conduction", type=float, choices=(0.0, 0.5, 1.0), default=0.0)
    sp.add_argument("--hdpp", action=argparse.BooleanOptionalAction, default=None,
                    help="attach power pillars to the rails (default: on when HEJs are used)")
    sp.add_argument("--hej", type=int, default=0, help="junctions on the first N evaluate transistors")
    sp.add_argument("--hej-positions", type=int, nargs="+", help="explicit transistor indices for junctions")
    sp.add_argument("--bridge-pitches", type=float, help="bridge length in nanowire pitches")
    sp.set_defaults(func=cmd_thermal)

    sp = sub.add_parser("simulate", parents=[common], help="phase-accurate simulation of a netlist file")
    sp.add_argument("netlist")
    sp.add_argument("stimulus", help="CSV: header of input names, one 0/1 row per wave")
    sp.add_argument("--rail", choices=("dual", "single"), default="dual")
    sp.add_argument("--reset-hold", action="store_true", help="stages hold logic 0 before their first cycle")
    sp.add_argument("--slots", type=int, help="number of slots (default: until the last wave is out)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("wisp", parents=[common], help="run, assemble or disassemble WISP-4 programs")
    sp.add_argument("action", choices=("run", "assemble", "disassemble"))
    sp.add_argument("program", help="assembly (.asm) or ROM image (.rom)")
    sp.add_argument("--cycles", type=int, default=isa.ROM_WORDS, help="instructions fetched")
    sp.add_argument("--trace", action="store_true", help="write the full slot trace")
    sp.set_defaults(func=cmd_wisp)

    sp = sub.add_parser("layout", parents=[common], help="nanowire placement and area")
    sp.add_argument("--design", default="cla4", help=f"one of {', '.join(DESIGNS)} or a netlist file")
    sp.add_argument("--calibrate", type=float, nargs="?", const=0.76, metavar="UM2",
                    help="fit the overhead factor so the 4-bit CLA has this area (default 0.76)")
    sp.add_argument("--sweep", choices=("spacing", "feature_size", "aspect_ratio"))
    sp.add_argument("--values", type=float, nargs="+")
    sp.set_defaults(func=cmd_layout)

    sp = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    sp.set_defaults(func=cmd_accept)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        bundle = load_config(args.config)
        return args.func(args, bundle, Outputs(args, bundle))
    except (ConfigError, UsageError, isa.AsmError, isa.DecodeError, nlio.NetlistError, FileNotFoundError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FanInError, th.ThermalError, ValueError, RuntimeError) as exc:
        print(f"{parser.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
