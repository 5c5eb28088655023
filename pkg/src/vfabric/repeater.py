"""Repeated-wire delay, optimal repeater sizing and tier-wise repeater counts.

Lengths passed to the delay functions are in nm; distribution lengths are
converted with the fabric's horizontal gate pitch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .interconnect import InterconnectDistribution
from .params import TIER_NAMES, CapacitanceModel, DriverParams, TierParams

EPS0 = 8.8541878128e-12  # F/m


@dataclass(frozen=True)
class WireRC:
    r_per_len: float  # Ohm/nm
    c_per_len: float  # F/nm
    tier: str

    def __post_init__(self) -> None:
        if not (self.r_per_len > 0 and self.c_per_len > 0):
            raise ValueError("wire r and c must be > 0")


@dataclass(frozen=True)
class TierBoundaries:
    l_max_local: int
    l_max_semi_global: int
    l_max_global: int

    def as_dict(self) -> dict[str, int]:
        return dict(zip(TIER_NAMES, (self.l_max_local, self.l_max_semi_global, self.l_max_global)))


@dataclass(frozen=True)
class TierReport:
    tier: str
    l_opt: float  # nm
    s_opt: float
    l_max: int  # gate pitches
    boundary_delay: float  # s
    repeaters: float


@dataclass(frozen=True)
class RepeaterReport:
    mode: str
    tiers: list[TierReport] = field(default_factory=list)

    @property
    def total(self) -> float:
        return math.fsum(t.repeaters for t in self.tiers)


def wire_rc(tier: TierParams, cap: CapacitanceModel | None = None) -> WireRC:
    cap = cap or CapacitanceModel()
    width = tier.pitch / 2.0
    height = width * tier.aspect_ratio
    rho = tier.resistivity * 1e-8  # uOhm*cm -> Ohm*m
    r = rho / (width * 1e-9 * height * 1e-9) * 1e-9
    if tier.c_per_len is not None:
        c = tier.c_per_len
    else:
        c = EPS0 * cap.eps_r * (2.0 * tier.aspect_ratio * cap.k_coupling + cap.k_ground) * 1e-9
    return WireRC(r, c, tier.name)


def segment_delay(l: float, s: float, driver: DriverParams, wire: WireRC) -> float:
    """Delay of one repeater driving a wire segment of length ``l`` nm at size ``s``."""
    if l < 0 or s <= 0:
        raise ValueError("need l >= 0 and s > 0")
    r, c = wire.r_per_len, wire.c_per_len
    r_tr = driver.r0 / s
    c_l = s * driver.c0
    c_p = s * driver.cp
    return driver.b * r_tr * (c_l + c_p) + driver.b * (c * r_tr + r * c_l) * l + driver.a * r * c * l * l


def optimal_segment(driver: DriverParams, wire: WireRC) -> tuple[float, float]:
    r, c = wire.r_per_len, wire.c_per_len
    l_opt = math.sqrt(driver.b * driver.r0 * (driver.c0 + driver.cp) / (driver.a * r * c))
    s_opt = math.sqrt(driver.r0 * c / (r * driver.c0))
    return l_opt, s_opt


def delay_per_length(l: float, s: float, driver: DriverParams, wire: WireRC) -> float:
    """Delay per nm of an infinitely repeated wire with segment ``l`` and size ``s``."""
    return segment_delay(l, s, driver, wire) / l


def segmented_delay(l_total: float, l_seg: float, s: float, driver: DriverParams, wire: WireRC) -> float:
    """Split ``l_total`` into ceil(l_total/l_seg) equal segments, each driven at size ``s``."""
    if l_total <= 0:
        return segment_delay(0.0, s, driver, wire)
    n = max(1, math.ceil(l_total / l_seg - 1e-12))
    return n * segment_delay(l_total / n, s, driver, wire)


def total_wire_delay(l_total: float, driver: DriverParams, wire: WireRC) -> float:
    l_opt, s_opt = optimal_segment(driver, wire)
    return segmented_delay(l_total, l_opt, s_opt, driver, wire)


def repeaters_on_wire(l_nm: float, l_opt: float) -> int:
    """Repeaters on one wire: segments minus the one driven by the source gate."""
    if l_nm < l_opt:
        return 0
    return math.ceil(l_nm / l_opt - 1e-12) - 1


def _largest_within(limit: float, hi: int, delay_of) -> int:
    """Largest integer l in [1, hi] with delay_of(l) <= limit (1 if none)."""
    if delay_of(1) > limit:
        return 1
    lo = 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if delay_of(mid) <= limit * (1 + 1e-12):
            lo = mid
        else:
            hi = mid - 1
    return lo


def classify(
    dist: InterconnectDistribution,
    tiers: dict[str, TierParams],
    driver: DriverParams,
    mode: str,
    gate_pitch_nm: float,
    cap: CapacitanceModel | None = None,
) -> TierBoundaries:
    """Tier boundaries (gate pitches) from the delay budget of the longest wire.

    For ``cmos`` the lower tiers get the fraction beta_i/beta_global of the
    global boundary delay; for ``skybridge`` every tier gets the same delay.
    """
    if mode not in ("cmos", "skybridge"):
        raise ValueError("mode must be cmos or skybridge")
    l_glob = dist.longest(1.0)
    wires = {n: wire_rc(tiers[n], cap) for n in TIER_NAMES}

    def delay(name):
        return lambda l: total_wire_delay(l * gate_pitch_nm, driver, wires[name])

    t_glob = delay("global")(l_glob)
    out = []
    for name in TIER_NAMES[:2]:
        ratio = tiers[name].beta / tiers["global"].beta if mode == "cmos" else 1.0
        out.append(_largest_within(ratio * t_glob, l_glob, delay(name)))
    local = min(out[0], out[1])
    return TierBoundaries(local, out[1], l_glob)


def repeater_counts(
    dist: InterconnectDistribution,
    bounds: TierBoundaries,
    tiers: dict[str, TierParams],
    driver: DriverParams,
    mode: str,
    gate_pitch_nm: float,
    cap: CapacitanceModel | None = None,
) -> RepeaterReport:
    """Sum f(l) * R(l) over each tier's length range (previous boundary, own boundary]."""
    report = RepeaterReport(mode)
    prev = 0
    for name, l_top in zip(TIER_NAMES, (bounds.l_max_local, bounds.l_max_semi_global, bounds.l_max_global)):
        wire = wire_rc(tiers[name], cap)
        l_opt, s_opt = optimal_segment(driver, wire)
        count = 0.0
        if not (mode == "skybridge" and name == "local"):
            terms = []
            for l in range(max(prev + 1, 1), l_top + 1):
                r = repeaters_on_wire(l * gate_pitch_nm, l_opt)
                if r:
                    terms.append(dist.count_at(l) * r)
            count = math.fsum(terms)
        t_b = total_wire_delay(l_top * gate_pitch_nm, driver, wire)
        report.tiers.append(TierReport(name, l_opt, s_opt, l_top, t_b, count))
        prev = max(prev, l_top)
    return report


def analyse(bundle, param_set: str, mode: str, n_gates: int | None = None):
    """Distribution, tier boundaries and repeater report for one parameter set."""
    from dataclasses import replace

    from .interconnect import distribution

    fab = bundle.fabric(param_set)
    if n_gates is not None:
        fab = replace(fab, n_gates=int(n_gates))
    dist = distribution(fab)
    driver = bundle.drivers[mode]
    bounds = classify(dist, bundle.tiers, driver, mode, fab.gate_pitch_h, bundle.capacitance)
    rep = repeater_counts(dist, bounds, bundle.tiers, driver, mode, fab.gate_pitch_h, bundle.capacitance)
    return fab, dist, bounds, rep
