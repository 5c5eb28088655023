"""Deterministic acceptance suite: every check prints measured value, target and verdict."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import interconnect as ic
from . import repeater as rp
from . import thermal as th
from .designs import isa
from .designs.arith import ClaSpec, gen_cla, gen_multiplier4
from .designs.common import evaluate, evaluate_stream
from .designs.nwram import NwramCell
from .designs.wisp import FILL_CYCLES, gen_wisp4, run_wisp
from .dynlogic.electrical import linear_fit_r2, stack_delay
from .layout import area, calibrate, place, sensitivity_sweep
from .params import ConfigBundle, load_config

PROGRAM_DIR = Path(__file__).parent / "data" / "programs"
SEED = 20240601


@dataclass
class Check:
    key: str
    name: str
    measured: str
    target: str
    passed: bool


@dataclass
class Criterion:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, key: str, name: str, measured: str, target: str, passed: bool) -> None:
        self.checks.append(Check(key, name, measured, target, bool(passed)))


def within(x: float, target: float, rel: float) -> bool:
    return abs(x - target) <= rel * abs(target)


# ---- 1-3: interconnect and repeaters

def _longest_physical(bundle: ConfigBundle, name: str) -> tuple[int, float]:
    fab = bundle.fabric(name)
    d = ic.distribution(fab)
    l = d.longest(1.0)
    return l, l * fab.gate_pitch_h


def crit_interconnect_ratio(bundle: ConfigBundle) -> Criterion:
    c = Criterion(1, "Interconnect ratio")
    t0 = time.perf_counter()
    l_sb, p_sb = _longest_physical(bundle, "skybridge")
    l_c1, p_c1 = _longest_physical(bundle, "cmos1")
    elapsed = time.perf_counter() - t0
    ratio = p_c1 / p_sb
    c.add("ratio", "longest wire CMOS-1 / Skybridge (physical length)",
          f"{ratio:.2f}x ({l_c1} vs {l_sb} pitches)", "[5x, 15x]", 5 <= ratio <= 15)
    c.add("runtime", "runtime", "within limit" if elapsed <= 60 else "over limit", "<= 60 s", elapsed <= 60)
    return c


def crit_repeaters(bundle: ConfigBundle) -> Criterion:
    c = Criterion(2, "Repeater reduction")
    sb = rp.analyse(bundle, "skybridge", "skybridge")[3].total
    cm = rp.analyse(bundle, "cmos1", "cmos")[3].total
    ratio = cm / sb if sb else math.inf
    c.add("ratio", "CMOS-1 / Skybridge repeaters", f"{ratio:.1f}x ({cm:.4g} vs {sb:.4g})", ">= 30x", ratio >= 30)
    return c


def crit_normalization(bundle: ConfigBundle) -> Criterion:
    c = Criterion(3, "Normalization")
    for name in ("skybridge", "cmos1", "cmos2"):
        d = ic.distribution(bundle.fabric(name))
        err = abs(d.total() / d.i_total - 1)
        c.add(name, f"sum f(l) vs I_total, {name}", f"{err:.2e}", "<= 1e-3", err <= 1e-3)
    return c


def crit_distribution_oracle() -> Criterion:
    c = Criterion(4, "Distribution oracle")
    h = ic.pair_histogram(8, 8)
    l_max = ic.l_max_2d(64)
    l = np.arange(1, l_max + 1)
    r2d = float(np.corrcoef(h[1 : l_max + 1], ic.m_2d(l, ic.array_span(64)))[0, 1])
    c.add("8x8", "Pearson r, 8x8 grid vs M_2D", f"{r2d:.5f}", ">= 0.98", r2d >= 0.98)
    h3 = ic.pair_histogram(4, 4, 2, 1)
    l3 = np.arange(1, len(h3))
    r3d = float(np.corrcoef(h3[1:], ic.m_3d(l3, ic.array_span(16), 2, 1))[0, 1])
    c.add("4x4x2", "Pearson r, 4x4x2 grid vs M_SB", f"{r3d:.5f}", ">= 0.98", r3d >= 0.98)
    worst = 0.0
    for span in (14.0, 16.0, 6324.0, 4471.0):
        near, far = ic.m2d_branches(span / 2, span)
        worst = max(worst, float(abs(near - far) / far))
    c.add("continuity", "M_2D branch mismatch at L/2", f"{worst:.1e}", "<= 1e-12", worst <= 1e-12)
    return c


def crit_repeater_optimality(bundle: ConfigBundle) -> Criterion:
    c = Criterion(5, "Repeater optimality")
    worst_grad, beaten = 0.0, False
    for mode, tier in (("cmos", "global"), ("cmos", "semi_global"), ("skybridge", "global")):
        drv = bundle.drivers[mode]
        wire = rp.wire_rc(bundle.tiers[tier], bundle.capacitance)
        lo, so = rp.optimal_segment(drv, wire)
        f0 = rp.delay_per_length(lo, so, drv, wire)
        for i, (x, h) in enumerate(((lo, lo * 1e-5), (so, so * 1e-5))):
            def f(v):
                args = [lo, so]
                args[i] = v
                return rp.delay_per_length(args[0], args[1], drv, wire)
            grad = (f(x + h) - f(x - h)) / (2 * h)
            worst_grad = max(worst_grad, abs(grad) * x / f0)
        for dl in (0.9, 1.0, 1.1):
            for ds in (0.9, 1.0, 1.1):
                if (dl, ds) != (1.0, 1.0) and rp.delay_per_length(lo * dl, so * ds, drv, wire) < f0:
                    beaten = True
    c.add("gradient", "relative finite-difference gradient at optimum", f"{worst_grad:.1e}", "<= 1e-6",
          worst_grad <= 1e-6)
    c.add("probes", "+-10% probes beating the optimum", "yes" if beaten else "none", "none", not beaten)
    return c


# ---- 6: thermal

def crit_thermal(bundle: ConfigBundle) -> Criterion:
    c = Criterion(6, "Thermal scenarios")
    scale = th.calibration_scale(bundle)
    run = lambda sc: th.run_scenario(bundle, sc, scale)  # noqa: E731
    bare0 = run(th.Scenario(0.0))
    half = run(th.Scenario(0.5))
    full = run(th.Scenario(1.0))
    hdpp = run(th.Scenario(0.0, hdpp=True))
    eva = th.eva_positions(bundle)
    hej1 = run(th.Scenario(0.0, hdpp=True, hej=(eva[0],)))
    hej2 = run(th.Scenario(0.0, hdpp=True, hej=tuple(eva)))

    c.add("anchor", "bare gate=0 peak (calibration anchor)", f"{bare0.peak:.0f} K", "4307 K",
          within(bare0.peak, 4307, 1e-9))
    c.add("gate1", "bare gate=1 peak", f"{full.peak:.1f} K", "480 K +-15%", within(full.peak, 480, 0.15))
    c.add("hdpp", "HDPP-only gate=0 peak", f"{hdpp.peak:.1f} K", "2433 K +-20%", within(hdpp.peak, 2433, 0.20))
    top = hej1.transistors[eva[0]]["hot"]
    red1 = 1 - top / bare0.transistors[eva[0]]["hot"]
    c.add("hej1", "1-HEJ gate=0 topmost evaluate transistor", f"{top:.1f} K", "400 K +-15%", within(top, 400, 0.15))
    c.add("hej1_red", "1-HEJ peak reduction", f"{red1:.1%}", ">= 85%", red1 >= 0.85)
    red2 = 1 - hej2.average / bare0.average
    c.add("hej2", "2-HEJ average reduction", f"{red2:.1%}", "78% +-5 pp", abs(red2 - 0.78) <= 0.05)
    ordered = bare0.peak >= half.peak >= full.peak
    c.add("order", "peak(0) >= peak(0.5) >= peak(1)", f"{bare0.peak:.0f} >= {half.peak:.0f} >= {full.peak:.0f}",
          "ordered", ordered)
    mono = True
    for a, b in ((bare0, hdpp), (hdpp, hej1), (hej1, hej2)):
        mono &= bool(np.all(b.temperatures[: len(a.temperatures)] <= a.temperatures + 1e-9))
    c.add("monotone", "adding extraction features never heats any node", "yes" if mono else "no", "yes", mono)
    worst = 0.0
    for s in (bare0, half, full, hdpp, hej1, hej2):
        worst = max(worst, abs(s.ref_heat - s.injected) / s.injected, s.residual)
    c.add("energy", "energy conservation (relative)", f"{worst:.1e}", "<= 1e-9", worst <= 1e-9)
    return c


# ---- 7-10: logic

def crit_logic() -> Criterion:
    c = Criterion(7, "Logic correctness")
    v = np.arange(512)
    a, b, cin = v & 15, (v >> 4) & 15, v >> 8
    r = evaluate(gen_cla(4), {"a": a, "b": b, "cin": cin})
    bad = int(np.sum(r["s"] + (r["cout"] << 4) != a + b + cin))
    c.add("cla4", "4-bit CLA exhaustive (512)", f"{bad} mismatches", "0", bad == 0)
    mul = gen_multiplier4()
    v = np.arange(256)
    r = evaluate(mul, {"a": v & 15, "b": v >> 4})
    bad = int(np.sum(r["p"] != (v & 15) * (v >> 4)))
    c.add("mult", "4x4 multiplier exhaustive (256)", f"{bad} mismatches", "0", bad == 0)
    p = evaluate_stream(mul, [{"a": 0b0011, "b": 0b0111}])[0]["p"]
    stages = mul.out_stage + 1
    c.add("mult_example", "0011 x 0111 and result stage", f"{p:08b} at stage {stages}", "00010101 at stage 9",
          p == 0b00010101 and stages == 9)
    rng = np.random.default_rng(SEED)
    for w in (8, 16):
        a = rng.integers(0, 2**w, 10_000)
        b = rng.integers(0, 2**w, 10_000)
        cin = rng.integers(0, 2, 10_000)
        r = evaluate(gen_cla(w), {"a": a, "b": b, "cin": cin})
        bad = int(np.sum(r["s"] + (r["cout"] << w) != a + b + cin))
        c.add(f"cla{w}", f"{w}-bit CLA random (10,000)", f"{bad} mismatches", "0", bad == 0)
    return c


def shipped_programs() -> dict[str, str]:
    return {p.name: p.read_text() for p in sorted(PROGRAM_DIR.glob("*.asm"))}


def crit_wisp() -> Criterion:
    c = Criterion(8, "WISP-4")
    progs = shipped_programs()
    c.add("count", "shipped programs", str(len(progs)), ">= 5", len(progs) >= 5)
    worst_tp, fills, mismatched = math.inf, set(), []
    for name, text in progs.items():
        words = isa.assemble(text)
        pipe = run_wisp(words)
        ref = isa.wisp_reference(words)
        if (pipe.state.regs, pipe.state.pc) != (ref.regs, ref.pc):
            mismatched.append(name)
        worst_tp = min(worst_tp, pipe.throughput())
        fills.add(pipe.fill_cycles)
    c.add("equiv", "pipeline state == reference interpreter", "all match" if not mismatched else
          "mismatch: " + ",".join(mismatched), "all match", not mismatched)
    c.add("throughput", "steady-state instructions per cycle", f"{worst_tp:.3f}", "1", worst_tp == 1.0)
    fill = sorted(fills)
    c.add("fill", "fill cycles before first retirement", ",".join(map(str, fill)), str(FILL_CYCLES),
          fill == [5])
    return c


def crit_nwram() -> Criterion:
    c = Criterion(9, "NWRAM protocol")
    cell = NwramCell()
    cell.write(1)
    w1 = cell.stored
    cell.write(0)
    w0 = cell.stored
    c.add("write", "write-1 then write-0 (out, nout)", f"{w1} {w0}", "(1, 0) (0, 1)", w1 == (1, 0) and w0 == (0, 1))
    ok = True
    for state in (0, 1):
        for reads in (0, 1):
            cell = NwramCell(state=state)
            got = [cell.read() for _ in range(reads)]
            ok &= cell.stored == (state, 1 - state) and all(g == state for g in got)
    c.add("read", "non-destructive read over state x read", "4/4 preserved" if ok else "state flipped",
          "4/4 preserved", ok)
    return c


def stack_delays(bundle: ConfigBundle, max_fan_in: int = 9, loads: int = 4) -> list[float]:
    drv = bundle.drivers["skybridge"]
    return [stack_delay(m, drv.r0, loads * drv.c0, drv.cp) for m in range(1, max_fan_in + 1)]


def crit_fan_in(bundle: ConfigBundle) -> Criterion:
    c = Criterion(10, "Fan-in linearity")
    d = stack_delays(bundle)
    r2 = linear_fit_r2(range(1, 10), d)
    c.add("r2", "linear-fit R^2 of stack delay, m = 1..9, 4-inverter load", f"{r2:.4f}", ">= 0.98", r2 >= 0.98)
    return c


# ---- 11: layout

AREA_TARGETS = {"cla8": 1.34, "cla16": 2.15, "wisp4": 9.52}


def layout_designs():
    """Netlists used for area transfer; the 16-bit adder keeps one input free per gate."""
    return {
        "cla4": gen_cla(4).nl,
        "cla8": gen_cla(8).nl,
        "cla16": gen_cla(ClaSpec(16, max_fan_in=8)).nl,
        "wisp4": gen_wisp4(()).nl,
    }


def crit_area(bundle: ConfigBundle) -> Criterion:
    c = Criterion(11, "Area calibration transfer")
    nets = layout_designs()
    rules = calibrate(nets["cla4"], bundle.layout, 0.76)
    c.add("overhead", "overhead factor fitted on 4-bit CLA", f"{rules.overhead_factor:.4f}", "fit to 0.76 um^2",
          rules.overhead_factor > 0)
    for key, tol in (("cla8", 0.25), ("cla16", 0.25), ("wisp4", 0.40)):
        a = area(place(nets[key], rules), rules)
        t = AREA_TARGETS[key]
        c.add(key, f"{key} area", f"{a:.3f} um^2 ({a / t - 1:+.1%})", f"{t} um^2 +-{tol:.0%}", within(a, t, tol))
    nominal = rules.nanowire_height / rules.nanowire_width
    row = sensitivity_sweep(nets["cla4"], rules, "aspect_ratio", [nominal / 2])[0]
    c.add("aspect", "4-bit CLA at half aspect ratio", f"{row.area:.3f} um^2 ({row.area / 1.11 - 1:+.1%})",
          "1.11 um^2 +-25%", within(row.area, 1.11, 0.25))
    return c


def run_criteria(bundle: ConfigBundle | None = None) -> list[Criterion]:
    bundle = bundle or load_config()
    return [
        crit_interconnect_ratio(bundle),
        crit_repeaters(bundle),
        crit_normalization(bundle),
        crit_distribution_oracle(),
        crit_repeater_optimality(bundle),
        crit_thermal(bundle),
        crit_logic(),
        crit_wisp(),
        crit_nwram(),
        crit_fan_in(bundle),
        crit_area(bundle),
    ]


def render(criteria: list[Criterion]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["criterion", "check", "measured", "target", "result"])
    for cr in criteria:
        for ch in cr.checks:
            w.writerow([cr.number, ch.name, ch.measured, ch.target, "PASS" if ch.passed else "FAIL"])
    return buf.getvalue()


def determinism(bundle: ConfigBundle | None = None, first: str | None = None) -> Criterion:
    c = Criterion(12, "Determinism")
    a = first if first is not None else render(run_criteria(bundle))
    b = render(run_criteria(bundle))
    c.add("identical", "two runs produce identical tables", "identical" if a == b else "differ", "identical", a == b)
    return c


def run_all(bundle: ConfigBundle | None = None) -> list[Criterion]:
    crits = run_criteria(bundle)
    crits.append(determinism(bundle, render(crits)))
    return crits


def summary_lines(criteria: list[Criterion]) -> list[str]:
    out = []
    for cr in criteria:
        out.append(f"{'PASS' if cr.passed else 'FAIL'}  {cr.number:2d}. {cr.title}")
        for ch in cr.checks:
            mark = "ok " if ch.passed else "BAD"
            out.append(f"        [{mark}] {ch.name}: {ch.measured} (target {ch.target})")
    return out
