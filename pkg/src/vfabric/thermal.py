"""Steady-state thermal resistance networks for stacked nanowire transistors.

A network is a set of nodes joined by thermal resistors (K/W), with heat
sources (W) on some nodes and fixed-temperature reference nodes.  Solving
is plain nodal analysis: G T = P with the references as Dirichlet values.

Transistor model (one per stack position)::

    drain junction --Rde-- spacer --Rsp-- silicide --Rsil-- hot (heat source)
    hot --Rch/2-- channel --Rch/2-- source --Rde-- source junction
    channel --Rgate/g-- gate reference        (g = gate conduction level)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .params import ConfigBundle, MaterialProps, ThermalParams


class ThermalError(RuntimeError):
    pass


def resistor_from_geometry(length_nm: float, area_nm2: float, conductivity: float) -> float:
    """R = L / (k A) in K/W for a length in nm and an area in nm^2."""
    if not (length_nm > 0 and area_nm2 > 0 and conductivity > 0):
        raise ValueError("length, area and conductivity must be > 0")
    return (length_nm * 1e-9) / (conductivity * area_nm2 * 1e-18)


def heat_q(i_ds: float, v_ds: float) -> float:
    if i_ds < 0 or v_ds < 0:
        raise ValueError("current and voltage must be >= 0")
    return i_ds * v_ds


@dataclass
class ThermalNode:
    id: int
    label: str
    kind: str = "internal"
    temperature: float | None = None


@dataclass(frozen=True)
class ThermalResistor:
    node_a: int
    node_b: int
    resistance: float


@dataclass
class ThermalNetwork:
    nodes: list[ThermalNode] = field(default_factory=list)
    resistors: list[ThermalResistor] = field(default_factory=list)
    sources: dict[int, float] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    _by_label: dict[str, int] = field(default_factory=dict, repr=False)

    def add_node(self, label: str, reference: float | None = None) -> int:
        if label in self._by_label:
            raise ThermalError(f"duplicate node label {label!r}")
        if reference is not None and reference < 0:
            raise ThermalError("reference temperature must be >= 0 K")
        node = ThermalNode(len(self.nodes), label, "reference" if reference is not None else "internal", reference)
        self.nodes.append(node)
        self._by_label[label] = node.id
        return node.id

    def node(self, label: str) -> int:
        return self._by_label[label]

    def has(self, label: str) -> bool:
        return label in self._by_label

    def add_resistor(self, a: int, b: int, resistance: float) -> None:
        if a == b:
            raise ThermalError("self-loop resistor")
        if not resistance > 0:
            raise ThermalError("resistance must be > 0")
        self.resistors.append(ThermalResistor(a, b, float(resistance)))

    def add_source(self, node: int, q: float) -> None:
        if q < 0:
            raise ThermalError("heat source must be >= 0")
        self.sources[node] = self.sources.get(node, 0.0) + q

    def copy(self) -> "ThermalNetwork":
        return ThermalNetwork(
            [replace(n) for n in self.nodes],
            list(self.resistors),
            dict(self.sources),
            dict(self.meta),
            dict(self._by_label),
        )

    def references(self) -> list[int]:
        return [n.id for n in self.nodes if n.kind == "reference"]


@dataclass
class ThermalSolution:
    temperatures: np.ndarray
    labels: list[str]
    transistors: list[dict]
    ref_heat: float
    injected: float
    residual: float

    def at(self, label: str) -> float:
        return float(self.temperatures[self.labels.index(label)])

    @property
    def peak(self) -> float:
        return max(t["hot"] for t in self.transistors) if self.transistors else float(self.temperatures.max())

    @property
    def average(self) -> float:
        return float(np.mean([t["hot"] for t in self.transistors])) if self.transistors else float("nan")


def _unreached(net: ThermalNetwork) -> list[str]:
    adj: dict[int, list[int]] = {n.id: [] for n in net.nodes}
    for r in net.resistors:
        adj[r.node_a].append(r.node_b)
        adj[r.node_b].append(r.node_a)
    seen = set(net.references())
    stack = list(seen)
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return [n.label for n in net.nodes if n.id not in seen]


def solve(net: ThermalNetwork) -> ThermalSolution:
    refs = net.references()
    if not refs:
        raise ThermalError("network has no reference node")
    lost = _unreached(net)
    if lost:
        raise ThermalError(f"singular system: nodes not connected to any reference: {lost}")
    n = len(net.nodes)
    g = np.zeros((n, n))
    for r in net.resistors:
        c = 1.0 / r.resistance
        g[r.node_a, r.node_a] += c
        g[r.node_b, r.node_b] += c
        g[r.node_a, r.node_b] -= c
        g[r.node_b, r.node_a] -= c
    p = np.zeros(n)
    for k, q in net.sources.items():
        p[k] += q
    is_ref = np.array([nd.kind == "reference" for nd in net.nodes])
    free = np.nonzero(~is_ref)[0]
    fixed = np.nonzero(is_ref)[0]
    t = np.zeros(n)
    t[fixed] = [net.nodes[i].temperature for i in fixed]
    if free.size:
        rhs = p[free] - g[np.ix_(free, fixed)] @ t[fixed]
        t[free] = np.linalg.solve(g[np.ix_(free, free)], rhs)
    injected = float(p[free].sum())
    flow = g @ t  # net outflow per node; at references this is heat absorbed (negated)
    absorbed = float(-flow[fixed].sum())
    scale = max(abs(injected), 1e-300)
    residual = float(np.abs(flow[free] - p[free]).max() / scale) if free.size else 0.0
    labels = [nd.label for nd in net.nodes]
    rows = []
    for info in net.meta.get("transistors", []):
        row = dict(info)
        for region in ("hot", "silicide", "spacer", "channel", "source"):
            row[region] = float(t[net.node(f"{info['name']}.{region}")])
        rows.append(row)
    return ThermalSolution(t, labels, rows, absorbed, injected, residual)


def _geom(mat: MaterialProps, length: float | None = None) -> float:
    l, w, th = mat.dims
    return resistor_from_geometry(length if length is not None else l, w * th, mat.thermal_conductivity)


def element_resistances(materials: dict[str, MaterialProps]) -> dict[str, float]:
    r = {name: _geom(m) for name, m in materials.items()}
    r["gate_branch"] = r["channel"] / 2.0 + r["gate_oxide"] + r["gate_electrode"]
    return r


def build_transistor(
    materials: dict[str, MaterialProps],
    gate_conduction: float,
    q: float = 0.0,
    t_ref: float = 350.0,
    net: ThermalNetwork | None = None,
    name: str = "T0",
    drain: int | None = None,
    source: int | None = None,
    gate_ref: int | None = None,
    gate_temperature: float | None = None,
) -> ThermalNetwork:
    """Add one transistor between ``drain`` and ``source`` nodes.

    Without a network, a standalone device is built with all three
    contacts held at ``t_ref``.
    """
    if gate_conduction not in (0, 0.5, 1) and not 0 <= gate_conduction <= 1:
        raise ValueError("gate_conduction must lie in [0, 1]")
    if net is None:
        net = ThermalNetwork()
        drain = net.add_node(f"{name}.drain_contact", t_ref)
        source = net.add_node(f"{name}.source_contact", t_ref)
    r = element_resistances(materials)
    hot = net.add_node(f"{name}.hot")
    sil = net.add_node(f"{name}.silicide")
    spc = net.add_node(f"{name}.spacer")
    ch = net.add_node(f"{name}.channel")
    src = net.add_node(f"{name}.source")
    net.add_resistor(hot, sil, r["silicide"])
    net.add_resistor(sil, spc, r["spacer"])
    net.add_resistor(spc, drain, r["drain_electrode"])
    net.add_resistor(hot, ch, r["channel"] / 2.0)
    net.add_resistor(ch, src, r["channel"] / 2.0)
    net.add_resistor(src, source, r["drain_electrode"])
    if gate_conduction > 0:
        if gate_temperature is not None:
            g = net.add_node(f"{name}.gate_contact", gate_temperature)
            net.add_resistor(ch, g, r["gate_branch"])
        else:
            if gate_ref is None:
                gate_ref = net.add_node(f"{name}.gate_contact", t_ref)
            net.add_resistor(ch, gate_ref, r["gate_branch"] / gate_conduction)
    if q:
        net.add_source(hot, q)
    net.meta.setdefault("transistors", []).append({"name": name})
    return net


def _role(local: int, per: int) -> str:
    if local == 0:
        return "eva"
    if local == per - 1:
        return "pre"
    return f"in{local}"


def build_nanowire_stack(
    bundle: ConfigBundle,
    n_gates: int | None = None,
    fan_in: int | None = None,
    gate_conduction: float = 0.0,
    scale: float = 1.0,
    gate_temperatures: list[float] | None = None,
) -> ThermalNetwork:
    """Series stack of ``n_gates`` gates with ``fan_in + 2`` transistors each.

    Transistor 0 is the top of the wire.  Each gate's evaluate transistor is
    its topmost one; drains face the mid-stack supply.  The bottom junction
    sits at the substrate temperature; the top and middle rail junctions only
    reach a reference once pillars are attached.
    """
    tp: ThermalParams = bundle.thermal
    n_gates = tp.gates if n_gates is None else n_gates
    fan_in = tp.fan_in if fan_in is None else fan_in
    if fan_in < 1 or n_gates < 1:
        raise ValueError("fan_in and n_gates must be >= 1")
    per = fan_in + 2
    total = n_gates * per
    q = heat_q(tp.i_on, tp.v_dd / per) * scale
    net = ThermalNetwork()
    net.meta.update(
        gate_conduction=gate_conduction, hdpp_attached=False, hej_positions=[],
        bridge_pitches=tp.bridge_pitches, per_gate=per, n_transistors=total, q=q,
    )
    gate_ref = net.add_node("gate_ref", tp.t_ref)
    junc = []
    for i in range(total + 1):
        ref = tp.t_ref if i == total else None
        junc.append(net.add_node(f"J{i}", ref))
    net.meta["rails"] = {"top": junc[0], "bottom": junc[total]}
    net.meta["rails"].update({f"mid{k}": junc[k * per] for k in range(1, n_gates)})
    ild_ref = net.add_node("ild_ref", tp.t_ref) if tp.lateral_ild else None
    r_ild = _geom(bundle.materials["interlayer"], tp.ild_length)
    for t in range(total):
        gate, local = divmod(t, per)
        upper, lower = junc[t], junc[t + 1]
        # even gates hang below a GND rail (drain faces down), odd gates sit above one
        drain, source = (lower, upper) if gate % 2 == 0 else (upper, lower)
        name = f"T{t}"
        gt = None
        if gate_conduction > 0 and gate_temperatures is not None:
            gt = gate_temperatures[t]
        build_transistor(bundle.materials, gate_conduction, q, tp.t_ref, net, name, drain, source, gate_ref, gt)
        net.meta["transistors"][-1].update(index=t, gate=gate, role=_role(local, per))
        if ild_ref is not None:
            net.add_resistor(net.node(f"{name}.channel"), ild_ref, r_ild)
    return net


def _bridge(bundle: ConfigBundle, pitches: float) -> float:
    return _geom(bundle.materials["bridge"], pitches * bundle.thermal.nanowire_pitch)


def attach_hdpp(net: ThermalNetwork, bundle: ConfigBundle, bridge_pitches: float | None = None) -> ThermalNetwork:
    """Tie every rail contact to a pillar at reference temperature via contact + bridge."""
    pitches = bundle.thermal.bridge_pitches if bridge_pitches is None else bridge_pitches
    out = net.copy()
    pillar = out.add_node("hdpp", bundle.thermal.t_ref)
    r = _geom(bundle.materials["drain_electrode"]) + _bridge(bundle, pitches)
    for name, node in out.meta["rails"].items():
        if out.nodes[node].kind != "reference":
            out.add_resistor(node, pillar, r)
    out.meta["hdpp_attached"] = True
    out.meta["bridge_pitches"] = pitches
    return out


def attach_hej(
    net: ThermalNetwork, bundle: ConfigBundle, positions: list[int], bridge_pitches: float | None = None
) -> ThermalNetwork:
    """Heat-extraction junction + bridge from each listed transistor's hot node to a ground pillar."""
    if not positions:
        return net
    pitches = bundle.thermal.bridge_pitches if bridge_pitches is None else bridge_pitches
    total = net.meta["n_transistors"]
    for p in positions:
        if not 0 <= p < total:
            raise ValueError(f"HEJ position {p} out of range [0, {total})")
    out = net.copy()
    pillar = out.node("gnd_pillar") if out.has("gnd_pillar") else out.add_node("gnd_pillar", bundle.thermal.t_ref)
    r = _geom(bundle.materials["heat_junction"]) + _bridge(bundle, pitches)
    for p in positions:
        out.add_resistor(out.node(f"T{p}.hot"), pillar, r)
    out.meta["hej_positions"] = sorted(set(out.meta["hej_positions"]) | set(positions))
    return out


def calibration_scale(bundle: ConfigBundle) -> float:
    """Heat scale that puts the bare, gate-open stack peak at the configured target."""
    tp = bundle.thermal
    sol = solve(build_nanowire_stack(bundle, gate_conduction=0.0, scale=1.0))
    rise = sol.peak - tp.t_ref
    if not rise > 0:
        raise ThermalError("bare stack shows no temperature rise; cannot calibrate")
    return (tp.calibration_peak - tp.t_ref) / rise


@dataclass(frozen=True)
class Scenario:
    gate_conduction: float = 0.0
    hdpp: bool = False
    hej: tuple[int, ...] = ()
    bridge_pitches: float | None = None


def scenario_network(bundle: ConfigBundle, sc: Scenario, scale: float | None = None) -> ThermalNetwork:
    scale = calibration_scale(bundle) if scale is None else scale
    gate_t = None
    g = sc.gate_conduction
    if 0 < g < 1 and bundle.thermal.gate_half_mode == "midpoint":
        # gate contacts sit between the reference and the open-gate channel temperature
        open_sol = solve(build_nanowire_stack(bundle, gate_conduction=0.0, scale=scale))
        tr = bundle.thermal.t_ref
        gate_t = [tr + (1 - g) * (row["channel"] - tr) for row in open_sol.transistors]
    net = build_nanowire_stack(bundle, gate_conduction=g, scale=scale, gate_temperatures=gate_t)
    if sc.hdpp:
        net = attach_hdpp(net, bundle, sc.bridge_pitches)
    if sc.hej:
        net = attach_hej(net, bundle, list(sc.hej), sc.bridge_pitches)
    return net


def run_scenario(bundle: ConfigBundle, sc: Scenario, scale: float | None = None) -> ThermalSolution:
    return solve(scenario_network(bundle, sc, scale))


def eva_positions(bundle: ConfigBundle) -> list[int]:
    per = bundle.thermal.fan_in + 2
    return [k * per for k in range(bundle.thermal.gates)]


def is_finite_solution(sol: ThermalSolution) -> bool:
    return bool(np.all(np.isfinite(sol.temperatures))) and math.isfinite(sol.peak)
