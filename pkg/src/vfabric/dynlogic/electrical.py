"""First-order electrical estimates for dynamic NAND stacks."""
from __future__ import annotations

import numpy as np


def stack_delay(m: int, r_on: float, c_load: float, c_node: float) -> float:
    """Elmore delay of an m-deep series stack discharging ``c_load``.

    Each internal node between transistors carries ``c_node``; the node above
    transistor i sees i on-resistances to ground.
    """
    if m < 1:
        raise ValueError("fan-in must be >= 1")
    internal = sum(i * r_on * c_node for i in range(1, m + 1))
    return internal + m * r_on * c_load


def charge_share(v0: float, c_self: float, c_couple: float) -> float:
    """Floating-node voltage after a full-swing aggressor couples through ``c_couple``."""
    if c_self < 0 or c_couple < 0:
        raise ValueError("capacitances must be >= 0")
    if c_self + c_couple == 0:
        return v0
    return v0 * c_self / (c_self + c_couple)


def linear_fit_r2(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
