"""Stochastic wire-length distribution from Rent's rule, for planar and stacked fabrics.

Lengths are integers in units of the horizontal gate pitch.  The
distribution is f(l) = gamma * I(l) * M(l), where M counts gate pairs at
Manhattan distance l, I is the expected number of connections between such
a pair, and gamma normalises the total to the Rent-rule connection count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .params import FabricParams


@dataclass(frozen=True)
class BlockCounts:
    n_a: float
    n_b: float
    n_c: float


@dataclass(frozen=True)
class RentDataPoint:
    n: int
    t: float

    def __post_init__(self) -> None:
        if self.n < 1 or not self.t > 0:
            raise ValueError("RentDataPoint needs n >= 1 and t > 0")


@dataclass(frozen=True)
class InterconnectDistribution:
    lengths: np.ndarray
    counts: np.ndarray
    l_max: int
    gamma: float
    i_total: float

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.counts)

    def total(self) -> float:
        return math.fsum(self.counts.tolist())

    def longest(self, threshold: float = 1.0) -> int:
        """Largest length whose expected count is at least ``threshold`` (1 if none)."""
        idx = np.nonzero(self.counts >= threshold)[0]
        return int(self.lengths[idx[-1]]) if idx.size else 1

    def count_at(self, l: int) -> float:
        if 1 <= l <= self.l_max:
            return float(self.counts[l - 1])
        return 0.0


def _floor(x: float) -> int:
    # guard against 5.999999 for exact squares
    return int(math.floor(x + 1e-9))


def l_max_2d(n_gates: float) -> int:
    if n_gates < 2:
        raise ValueError("n_gates must be >= 2")
    return _floor(2.0 * (math.sqrt(n_gates) - 1.0))


def l_max_3d(n_gates: float, gz: int, pz: float) -> int:
    if gz < 1 or n_gates / gz < 1:
        raise ValueError("need gz >= 1 and n_gates/gz >= 1")
    return _floor(2.0 * (math.sqrt(n_gates / gz) - 1.0) + (gz - 1) * pz)


def m2d_branches(l, l_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Short-range and long-range expressions of the 2-D pair count; they meet at l_max/2."""
    l = np.asarray(l, dtype=float)
    return l**3 / 3.0 - l_max * l**2 + (l_max**2 / 2.0) * l, (l_max - l) ** 3 / 3.0


def _m2d(l: np.ndarray, l_max: float) -> np.ndarray:
    l = np.asarray(l, dtype=float)
    half = l < l_max / 2.0
    first, second = m2d_branches(l, l_max)
    out = np.where(half, first, second)
    return np.where((l > 0) & (l < l_max), out, 0.0)


def m_2d(l, l_max: float):
    """Number of gate pairs at distance ``l`` on a square array of span ``l_max``."""
    arr = np.asarray(l, dtype=float)
    if np.any(arr < 1) or np.any(arr > l_max):
        raise ValueError("l must lie in [1, l_max]")
    out = _m2d(arr, l_max)
    return float(out) if out.ndim == 0 else out


def m_3d(l, l_max_layer: float, gz: int, pz: float):
    """Pair count for ``gz`` stacked layers; ``pz`` is the layer pitch in gate pitches.

    Pairs on layers ``i`` apart are counted with multiplicity ``gz - i``
    and shifted by ``i * pz``; ``pz`` is rounded to whole pitches.
    """
    arr = np.asarray(l, dtype=float)
    if np.any(arr < 1):
        raise ValueError("l must be >= 1")
    step = round(pz)
    out = np.zeros_like(arr)
    for i in range(gz):
        out = out + (gz - i) * _m2d(arr - i * step, l_max_layer)
    return float(out) if out.ndim == 0 else out


def block_counts_2d(l) -> BlockCounts:
    l = np.asarray(l, dtype=float)
    return BlockCounts(np.ones_like(l) if l.ndim else 1.0, l * (l - 1.0), 2.0 * l)


def block_counts_3d(l, gz: int, pz: float) -> BlockCounts:
    l = np.asarray(l, dtype=float)
    step = round(pz)
    n_b = l * (l - 1.0)
    n_c = 2.0 * l
    for i in range(1, gz):
        x = l - i * step
        on = x > 0
        n_b = n_b + np.where(on, 2.0 * (gz - i) * x * (x - 1.0), 0.0) / gz
        n_c = n_c + np.where(on, 2.0 * (gz - i) * 2.0 * x, 0.0) / gz
    return BlockCounts(np.ones_like(l) if l.ndim else 1.0, n_b, n_c)


def _block_counts(params: FabricParams, l) -> BlockCounts:
    if params.gz == 1:
        return block_counts_2d(l)
    return block_counts_3d(l, params.gz, params.pz_pitches)


def i_of_l(l, params: FabricParams):
    """Expected connections between a gate pair at distance ``l``."""
    b = _block_counts(params, l)
    p = params.rent_p
    n_a, n_b, n_c = (np.asarray(x, dtype=float) for x in (b.n_a, b.n_b, b.n_c))
    bracket = (n_a + n_b) ** p - n_b**p + (n_b + n_c) ** p - (n_a + n_b + n_c) ** p
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(n_c > 0, params.alpha * params.rent_k * bracket / n_c, 0.0)
    return float(out) if out.ndim == 0 else out


def i_total(params: FabricParams) -> float:
    n = params.n_gates
    return params.alpha * params.rent_k * n * (1.0 - n ** (params.rent_p - 1.0))


def array_span(n_gates: float) -> float:
    """Shape parameter of the pair-count cubic: twice the side of a square array."""
    return 2.0 * math.sqrt(n_gates)


def _lengths_and_m(params: FabricParams) -> tuple[int, np.ndarray, np.ndarray]:
    # the cubic uses the continuous span 2*sqrt(N); the length range stops at l_max
    if params.gz == 1:
        top = l_max_2d(params.n_gates)
        lengths = np.arange(1, top + 1)
        return top, lengths, _m2d(lengths, array_span(params.n_gates))
    layer = array_span(params.n_gates / params.gz)
    top = l_max_3d(params.n_gates, params.gz, params.pz_pitches)
    lengths = np.arange(1, top + 1)
    return top, lengths, np.asarray(m_3d(lengths, layer, params.gz, params.pz_pitches))


def gamma(params: FabricParams) -> float:
    _, lengths, m = _lengths_and_m(params)
    s = math.fsum((m * np.asarray(i_of_l(lengths, params))).tolist())
    if not s > 0:
        raise ValueError("degenerate distribution: sum of M(l)*I(l) is zero")
    return i_total(params) / s


def distribution(params: FabricParams) -> InterconnectDistribution:
    top, lengths, m = _lengths_and_m(params)
    raw = m * np.asarray(i_of_l(lengths, params))
    s = math.fsum(raw.tolist())
    if not s > 0:
        raise ValueError("degenerate distribution: sum of M(l)*I(l) is zero")
    tot = i_total(params)
    g = tot / s
    return InterconnectDistribution(lengths, g * raw, top, g, tot)


def rent_fit(data: Iterable[RentDataPoint | tuple[int, float]]) -> tuple[float, float]:
    """Least-squares fit of log t = log k + p log n; repeated n are merged by geometric mean."""
    groups: dict[int, list[float]] = {}
    for pt in data:
        n, t = (pt.n, pt.t) if isinstance(pt, RentDataPoint) else pt
        if n < 1 or not t > 0:
            raise ValueError("Rent data needs n >= 1 and t > 0")
        groups.setdefault(int(n), []).append(math.log(t))
    if len(groups) < 2:
        raise ValueError("Rent fit needs at least two distinct n values")
    ns = sorted(groups)
    x = np.log(np.array(ns, dtype=float))
    y = np.array([sum(groups[n]) / len(groups[n]) for n in ns])
    p, logk = np.polyfit(x, y, 1)
    return float(math.exp(logk)), float(p)


def gate_pitch(modules: Sequence[tuple[float, int, int]]) -> float:
    """Mean gate pitch over modules given as (area nm^2, gate count, stacking)."""
    if not modules:
        raise ValueError("no modules given")
    pitches = []
    for area, n, stack in modules:
        if not area > 0 or n < 1 or stack < 1:
            raise ValueError("module area, gate count and stacking must be positive")
        pitches.append(math.sqrt(stack * area / n))
    return sum(pitches) / len(pitches)


def pair_histogram(nx: int, ny: int, nz: int = 1, pz: int = 1) -> np.ndarray:
    """Exact count of unordered site pairs per Manhattan distance on an nx*ny*nz grid.

    Index ``d`` of the result holds the number of pairs at distance ``d``;
    a layer step costs ``pz`` units.
    """
    pts = np.array([(x, y, z) for z in range(nz) for y in range(ny) for x in range(nx)])
    diff = np.abs(pts[:, None, :] - pts[None, :, :])
    dist = diff[..., 0] + diff[..., 1] + pz * diff[..., 2]
    iu = np.triu_indices(len(pts), k=1)
    return np.bincount(dist[iu])
