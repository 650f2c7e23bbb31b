"""Capacity bounds in the super-exponential scale ``M = 2^((n log n) R)``.

Asymptotically the identification capacity satisfies::

    (1 - 2 (kappa + mu)) / 4  <=  C  <=  1 + kappa + mu / 2

for ``kappa, mu >= 0`` with ``kappa + mu < 1/2``. The finite-n columns of
:func:`sweep` evaluate the displayed terms of the codebook-size bounds and
normalize them by ``n log2 n``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .channel import ChannelParams
from .codebook import log_m_lower, log_m_upper, packing_params
from .exceptions import InadmissibleRegion

__all__ = [
    "CapacityBounds",
    "ConverseParams",
    "check_admissible",
    "capacity_bounds",
    "converse_params",
    "sweep",
    "SWEEP_FIELDS",
    "write_sweep_csv",
]


@dataclass(frozen=True)
class CapacityBounds:
    lower: float
    upper: float


@dataclass(frozen=True)
class ConverseParams:
    epsilon_prime: float
    alpha_n: float


def check_admissible(kappa: float, mu: float) -> None:
    if not (0.0 <= kappa < 0.5 and 0.0 <= mu < 0.5 and kappa + mu < 0.5):
        raise InadmissibleRegion(f"(kappa={kappa}, mu={mu}) is outside kappa, mu >= 0, kappa + mu < 1/2")


def capacity_bounds(kappa: float, mu: float) -> CapacityBounds:
    check_admissible(kappa, mu)
    return CapacityBounds(lower=(1 - 2 * (kappa + mu)) / 4, upper=1 + kappa + mu / 2)


def converse_params(params: ChannelParams, n_bar: int | None = None) -> ConverseParams:
    """``eps' = a / n_bar^(2 (1 + mu/2 + b))`` and ``alpha = sqrt(n_bar eps')``."""
    nb = params.n_bar if n_bar is None else n_bar
    eps = params.a / nb ** (2 * (1 + params.mu / 2 + params.b))
    return ConverseParams(epsilon_prime=eps, alpha_n=math.sqrt(nb * eps))


SWEEP_FIELDS = ["kappa", "mu", "n", "lower", "upper", "lb_finite_norm", "ub_finite_norm", "b"]


def sweep(grid, n_values, template: ChannelParams | None = None, h_min: float = 1.0) -> list[dict]:
    """Tabulate limits and finite-n normalized bounds over a (kappa, mu) grid.

    The finite-n bounds use a unit-tap CIR model (``L = 1``) with ``K`` taps
    and the packing floor ``h_min``.
    """
    grid = [(float(k), float(m)) for k, m in grid]
    bad = []
    for k, m in grid:
        try:
            check_admissible(k, m)
        except InadmissibleRegion:
            bad.append((k, m))
    if bad:
        raise InadmissibleRegion(f"inadmissible grid points: {bad}")
    template = template or ChannelParams(n=2)
    rows = []
    for k, m in grid:
        cap = capacity_bounds(k, m)
        for n in n_values:
            p = template.replace(n=int(n), kappa=k, mu=m)
            norm = p.n * math.log2(p.n)
            lo = log_m_lower(p, packing_params(p, h_min)) / norm
            hi = log_m_upper(p, None, converse_params(p).alpha_n) / norm
            rows.append(
                {
                    "kappa": k, "mu": m, "n": p.n,
                    "lower": cap.lower, "upper": cap.upper,
                    "lb_finite_norm": lo, "ub_finite_norm": hi,
                    "b": p.b,
                }
            )
    return rows


def write_sweep_csv(rows, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
