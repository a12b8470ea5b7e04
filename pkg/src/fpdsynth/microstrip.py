"""Quasi-static microstrip analysis and synthesis (zero-thickness strip)."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidSpecError

C0 = 299_792_458.0
ETA0 = 120 * math.pi

#: Default gap of a square open-loop resonator, used only for size estimates.
SOLR_GAP = 0.5e-3


@dataclass(frozen=True)
class SubstrateSpec:
    er: float
    h: float
    tan_d: float = 0.0

    def __post_init__(self):
        if not self.er >= 1:
            raise InvalidSpecError(f"relative permittivity must be >= 1, got {self.er}")
        if not self.h > 0:
            raise InvalidSpecError(f"substrate thickness must be positive, got {self.h}")
        if not self.tan_d >= 0:
            raise InvalidSpecError(f"loss tangent must be nonnegative, got {self.tan_d}")


#: RT/Duroid 6010LM, 1.27 mm.
RT6010 = SubstrateSpec(er=10.7, h=1.27e-3, tan_d=0.0023)


@dataclass(frozen=True)
class LineGeometry:
    w: float
    z0: float
    eeff: float


def microstrip_analyze(w: float, sub: SubstrateSpec) -> LineGeometry:
    """Characteristic impedance and effective permittivity of a strip of width ``w``.

    Narrow strips (w/h <= 1) use the log form with the (1 - w/h)^2
    permittivity correction; wide strips the Wheeler-type denominator. The
    two branches differ by < 0.5 ohm at w/h = 1.
    """
    if not w > 0:
        raise InvalidSpecError(f"strip width must be positive, got {w}")
    u = w / sub.h
    er = sub.er
    if u <= 1:
        eeff = (er + 1) / 2 + (er - 1) / 2 * ((1 + 12 / u) ** -0.5 + 0.04 * (1 - u) ** 2)
        z0 = 60 / math.sqrt(eeff) * math.log(8 / u + 0.25 * u)
    else:
        eeff = (er + 1) / 2 + (er - 1) / 2 * (1 + 12 / u) ** -0.5
        z0 = ETA0 / math.sqrt(eeff) / (u + 1.393 + 0.667 * math.log(u + 1.444))
    return LineGeometry(w, z0, eeff)


def microstrip_synthesize(z0_target: float, sub: SubstrateSpec) -> LineGeometry:
    """Width giving ``z0_target``, by bisection on :func:`microstrip_analyze`.

    Impedance falls monotonically with width but jumps down slightly where
    the formulas switch at w/h = 1. A target inside that jump has no exact
    width; the switch point is returned, which is within half the jump.
    """
    if not 10 <= z0_target <= 200:
        raise InvalidSpecError(f"target impedance {z0_target} ohm outside 10-200 ohm")
    lo, hi = math.log(1e-4 * sub.h), math.log(1e3 * sub.h)
    if not microstrip_analyze(math.exp(hi), sub).z0 < z0_target < microstrip_analyze(math.exp(lo), sub).z0:
        raise InvalidSpecError(f"target impedance {z0_target} ohm not reachable on this substrate")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if microstrip_analyze(math.exp(mid), sub).z0 > z0_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    a, b = microstrip_analyze(math.exp(lo), sub), microstrip_analyze(math.exp(hi), sub)
    return a if abs(a.z0 - z0_target) <= abs(b.z0 - z0_target) else b


def guided_wavelength(f: float, eeff: float) -> float:
    if not f > 0:
        raise InvalidSpecError(f"frequency must be positive, got {f}")
    if not eeff >= 1:
        raise InvalidSpecError(f"effective permittivity must be >= 1, got {eeff}")
    return C0 / (f * math.sqrt(eeff))


def solr_side(f: float, eeff: float, gap: float = SOLR_GAP) -> float:
    """Rough side length of a half-wave square open-loop resonator (estimate only)."""
    return (guided_wavelength(f, eeff) / 2 + gap) / 4
