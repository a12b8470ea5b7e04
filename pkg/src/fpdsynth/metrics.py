"""Figures of merit extracted from a divider sweep."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import SParamSweep, band_edges
from .errors import InvalidInputError
from .prototype import ripple_from_return_loss

#: Isolation claimed for the fabricated layout; printed next to model values.
LAYOUT_ISOLATION_REFERENCE_DB = 10.6


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class MetricsReport:
    f0: float
    fbw: float
    band: tuple[float, float]
    rl_min_db: float
    output_rl_min_db: dict[str, float]
    il_db: dict[str, float]
    il_defined: bool
    ratios: tuple[float, ...]
    isolation_min_db: dict[str, float]
    passband_edges: tuple[float, float] | None
    checks: tuple[Check, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def _db20(x):
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(x)


def _at(freqs, y, f):
    return float(np.interp(f, freqs, y)) if freqs.size > 1 else float(y[0])


def _edges_at_loss(freqs, transmitted, f0, ripple_db):
    """Outermost contiguous frequencies around f0 where loss stays within ripple."""
    level = 10.0 ** (-ripple_db / 10.0)
    inside = transmitted >= level
    k0 = int(np.argmin(np.abs(freqs - f0)))
    if not inside[k0]:
        return None
    lo = k0
    while lo > 0 and inside[lo - 1]:
        lo -= 1
    hi = k0
    while hi < freqs.size - 1 and inside[hi + 1]:
        hi += 1
    if lo == 0 or hi == freqs.size - 1:
        return None

    def cross(a, b):
        ya, yb = transmitted[a] - level, transmitted[b] - level
        return freqs[a] + (freqs[b] - freqs[a]) * ya / (ya - yb)

    return cross(lo - 1, lo), cross(hi, hi + 1)


def report_metrics(
    sweep: SParamSweep,
    f0: float,
    fbw: float,
    rl_target_db: float = 20.0,
    ratio_targets=None,
    ratio_tol: float = 0.02,
    ripple_db: float | None = None,
) -> MetricsReport:
    """Return loss, insertion loss, split ratios and isolation of a sweep.

    Port 1 is the input; ports 2.. are outputs. The band is the equal-ripple
    band ``[f0, fbw]`` maps to (lowpass variable from -1 to +1). Ratios are
    output powers at f0 normalised to port 2. ``ripple_db`` sets the level
    for the measured passband edges and defaults to the ripple implied by
    ``rl_target_db``.
    """
    f = sweep.freqs
    lo, hi = band_edges(f0, fbw)
    tol = 1e-9 * f0
    if f[0] > lo + tol or f[-1] < hi - tol:
        raise InvalidInputError(
            f"sweep {f[0]:.6g}-{f[-1]:.6g} Hz does not cover band {lo:.6g}-{hi:.6g} Hz"
        )
    inband = (f >= lo - tol) & (f <= hi + tol)
    if not inband.any():
        raise InvalidInputError("no sweep points inside the band")
    P = sweep.n_ports
    mag = np.abs(sweep.S)

    rl = -_db20(mag[inband, 0, 0])
    rl_min = float(rl.min())
    out_rl = {f"S{p}{p}": float(-_db20(mag[inband, p - 1, p - 1]).min()) for p in range(2, P + 1)}

    power_f0 = np.array([_at(f, mag[:, q, 0] ** 2, f0) for q in range(1, P)])
    il_defined = P > 1 and bool(np.all(power_f0 > 0))
    il = {f"S{q + 1}1": float(-10 * math.log10(pw)) if pw > 0 else math.inf for q, pw in enumerate(power_f0, 1)}
    ratios = tuple((power_f0 / power_f0[0]).tolist()) if il_defined else ()

    iso = {}
    for a, b in itertools.combinations(range(2, P + 1), 2):
        iso[f"S{a}{b}"] = float(-_db20(mag[inband, a - 1, b - 1]).max())

    edges = None
    if P > 1:
        rip = ripple_from_return_loss(rl_target_db) if ripple_db is None else ripple_db
        edges = _edges_at_loss(f, (mag[:, 1:, 0] ** 2).sum(axis=1), f0, rip)

    checks = [Check("return_loss", rl_min >= rl_target_db, f"min in-band RL {rl_min:.2f} dB (target {rl_target_db:.2f} dB)")]
    if not il_defined:
        checks.append(Check("insertion_loss", False, "insertion loss undefined (no transmission to outputs)"))
    if ratio_targets is not None:
        t = np.asarray(ratio_targets, dtype=float)
        if len(t) != P - 1 or not il_defined:
            checks.append(Check("division_ratio", False, f"expected {len(t)} outputs, sweep has {P - 1}"))
        else:
            t = t / t[0]
            err = np.abs(np.asarray(ratios) - t) / t
            checks.append(
                Check(
                    "division_ratio",
                    bool(err.max() <= ratio_tol),
                    "ratios " + ":".join(f"{x:.4f}" for x in ratios) + f" (max error {err.max():.2%}, tol {ratio_tol:.2%})",
                )
            )
    return MetricsReport(
        f0=f0,
        fbw=fbw,
        band=(lo, hi),
        rl_min_db=rl_min,
        output_rl_min_db=out_rl,
        il_db=il,
        il_defined=il_defined,
        ratios=ratios,
        isolation_min_db=iso,
        passband_edges=edges,
        checks=tuple(checks),
    )


def format_report(rep: MetricsReport) -> str:
    """Human-readable report; dB to 2 decimals, ratios to 4."""
    lines = [
        f"band: {rep.band[0]:.0f} - {rep.band[1]:.0f} Hz (f0 {rep.f0:.0f} Hz, FBW {rep.fbw:.4f})",
        f"min in-band return loss S11: {rep.rl_min_db:.2f} dB",
    ]
    for k, v in rep.output_rl_min_db.items():
        lines.append(f"min in-band return loss {k}: {v:.2f} dB")
    if rep.il_defined:
        for k, v in rep.il_db.items():
            lines.append(f"insertion loss {k} at f0: {v:.2f} dB")
        lines.append("power ratios at f0: " + ":".join(f"{r:.4f}" for r in rep.ratios))
    else:
        lines.append("insertion loss: undefined")
    for k, v in rep.isolation_min_db.items():
        lines.append(
            f"min in-band isolation {k}: {v:.2f} dB (layout reference {LAYOUT_ISOLATION_REFERENCE_DB:.2f} dB)"
        )
    if rep.passband_edges is not None:
        lines.append(f"ripple-level passband edges: {rep.passband_edges[0]:.0f} - {rep.passband_edges[1]:.0f} Hz")
    for c in rep.checks:
        lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    lines.append("result: " + ("PASS" if rep.passed else "FAIL " + ",".join(rep.failures)))
    return "\n".join(lines)
