"""Chebyshev lowpass prototypes and divider coupling plans."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidSpecError

#: Ripple that reproduces g1 = g3 = 0.8516, g2 = 1.1032 for a third-order prototype.
DEFAULT_RIPPLE_DB = 0.04321


@dataclass(frozen=True)
class DividerSpec:
    """Design inputs for an N-way filtering power divider.

    ``ratios`` are relative output powers; only their proportions matter.
    """

    f0: float = 2.6e9
    fbw: float = 0.03
    z0: float = 50.0
    ratios: tuple[float, ...] = (1.0, 2.0, 4.0)
    order: int = 3
    ripple_db: float = DEFAULT_RIPPLE_DB

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        if not self.f0 > 0:
            raise InvalidSpecError(f"f0 must be positive, got {self.f0}")
        if not 0 < self.fbw < 1:
            raise InvalidSpecError(f"fractional bandwidth must lie in (0, 1), got {self.fbw}")
        if not self.z0 > 0:
            raise InvalidSpecError(f"z0 must be positive, got {self.z0}")
        if not self.ripple_db > 0:
            raise InvalidSpecError(f"ripple must be positive, got {self.ripple_db}")
        if int(self.order) != self.order or self.order < 1:
            raise InvalidSpecError(f"order must be an integer >= 1, got {self.order}")
        if len(self.ratios) < 2:
            raise InvalidSpecError("a divider needs at least two output ratios")
        _check_ratios(self.ratios)


@dataclass(frozen=True)
class GValues:
    """Normalised lowpass prototype elements ``g[0] .. g[n+1]``."""

    g: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.g) - 2

    def __getitem__(self, k):
        return self.g[k]

    def __len__(self):
        return len(self.g)


@dataclass(frozen=True)
class CouplingPlan:
    m_branch: float
    m_split: tuple[float, ...]
    qe_in: float
    qe_out: tuple[float, ...]
    fbw: float
    f0: float | None = field(default=None)

    @property
    def branches(self) -> int:
        return len(self.m_split)


def _check_ratios(ratios):
    for r in ratios:
        if not (r > 0 and math.isfinite(r)):
            raise InvalidSpecError(f"power ratios must be positive and finite, got {list(ratios)}")


def chebyshev_gvalues(order: int, ripple_db: float) -> GValues:
    """Element values of the equally-rippled lowpass ladder.

    Odd orders terminate in g[n+1] = 1; even orders need the mismatched load
    coth^2(beta/4).
    """
    if int(order) != order or order < 1:
        raise InvalidSpecError(f"order must be an integer >= 1, got {order}")
    if not ripple_db > 0:
        raise InvalidSpecError(f"ripple must be positive, got {ripple_db}")
    n = int(order)
    beta = math.log(1.0 / math.tanh(ripple_db / 17.37))
    gamma = math.sinh(beta / (2 * n))
    a = [math.sin((2 * k - 1) * math.pi / (2 * n)) for k in range(1, n + 1)]
    b = [gamma**2 + math.sin(k * math.pi / n) ** 2 for k in range(1, n + 1)]
    g = [1.0, 2 * a[0] / gamma]
    for k in range(2, n + 1):
        g.append(4 * a[k - 2] * a[k - 1] / (b[k - 2] * g[k - 1]))
    g.append(1.0 if n % 2 else 1.0 / math.tanh(beta / 4) ** 2)
    return GValues(tuple(g))


def ripple_from_return_loss(rl_db: float) -> float:
    """Passband ripple (dB) whose reflection peak equals ``rl_db``."""
    if not rl_db > 0:
        raise InvalidSpecError(f"return loss must be positive, got {rl_db}")
    return -10.0 * math.log10(1.0 - 10.0 ** (-rl_db / 10.0))


def coupling_plan(g: GValues, fbw: float, ratios) -> CouplingPlan:
    """Branch, split and external couplings for a common-resonator divider.

    Each branch is a third-order path (common resonator plus two branch
    resonators). The common-resonator coupling of the single-path filter is
    shared between branches in proportion to the square root of each
    branch's power weight.
    """
    if g.order != 3:
        raise InvalidSpecError(f"divider paths are third order, got a prototype of order {g.order}")
    if not 0 < fbw < 1:
        raise InvalidSpecError(f"fractional bandwidth must lie in (0, 1), got {fbw}")
    ratios = tuple(float(r) for r in ratios)
    if not ratios:
        raise InvalidSpecError("at least one branch ratio is required")
    _check_ratios(ratios)
    m_branch = fbw / math.sqrt(g[1] * g[2])
    total = math.fsum(ratios)
    m_split = tuple(m_branch * math.sqrt(r / total) for r in ratios)
    qe_in = g[0] * g[1] / fbw
    qe_out = g[3] * g[4] / fbw
    return CouplingPlan(m_branch, m_split, qe_in, (qe_out,) * len(ratios), fbw)


def plan_for(spec: DividerSpec, g_digits: int | None = None) -> tuple[GValues, CouplingPlan]:
    """Prototype and coupling plan for a complete divider spec.

    ``g_digits`` rounds the prototype to that many decimals before the
    couplings are computed. Four decimals gives Qe = 28.387 at 0.04321 dB,
    the unrounded prototype 28.386.
    """
    g = chebyshev_gvalues(spec.order, spec.ripple_db)
    if g_digits is not None:
        g = GValues(tuple(round(x, g_digits) for x in g.g))
    plan = coupling_plan(g, spec.fbw, spec.ratios)
    return g, CouplingPlan(plan.m_branch, plan.m_split, plan.qe_in, plan.qe_out, plan.fbw, spec.f0)
