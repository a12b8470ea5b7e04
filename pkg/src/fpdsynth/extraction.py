"""Recovering couplings from simulated responses, and response-driven tuning.

External Q comes from the reflection group delay of a singly loaded
resonator; inter-resonator coupling from the two split peaks of a weakly
loaded pair. :func:`tune` adjusts the nonzero entries of a coupling network
(never its topology) until return-loss and power-split targets are met.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .engine import CouplingNetwork, Port, SParamSweep, sparameters
from .errors import ExtractionError, InvalidSpecError

#: Port loading of the k-extraction pair, as a fraction of critical loading.
WEAK_LOADING = 0.1


@dataclass(frozen=True)
class ExtractionResult:
    quantity: str  # "Qe" or "k"
    value: float
    f0_detected: float
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)


def one_resonator_network(qe: float, f0: float, fbw: float = 0.03) -> CouplingNetwork:
    """Single resonator, single port, external quality factor ``qe``."""
    return CouplingNetwork(np.zeros((1, 1)), [Port(0, 1.0 / (qe * fbw))], f0, fbw)


def two_resonator_network(k: float, f0: float, loading: float = WEAK_LOADING) -> CouplingNetwork:
    """Coupled pair with a port on each resonator for split-peak extraction.

    The lowpass scaling uses ``fbw = k`` so the normalised coupling is 1;
    ``loading`` is the port load relative to the critical value (r = 1).
    """
    M = np.array([[0.0, k], [k, 0.0]])
    return CouplingNetwork(M, [Port(0, loading), Port(1, loading)], f0, k)


def _parabola_vertex(x, y, i):
    """Vertex of the parabola through samples i-1, i, i+1 (any spacing)."""
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    d0, d2 = x0 - x1, x2 - x1
    # y = y1 + b*t + a*t^2 with t = x - x1
    denom = d0 * d2 * (d0 - d2)
    a = (d2 * (y0 - y1) - d0 * (y2 - y1)) / denom
    b = (d0 * d0 * (y2 - y1) - d2 * d2 * (y0 - y1)) / denom
    if a >= 0:
        return x1, y1
    t = -b / (2 * a)
    t = min(max(t, d0), d2)
    return x1 + t, y1 + b * t + a * t * t


def _interior_maxima(y):
    return [i for i in range(1, len(y) - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]


def qe_from_group_delay(sweep: SParamSweep, f0_hint: float | None = None, port: int = 1) -> ExtractionResult:
    """External Q of a singly loaded resonator, Qe = w0 * tau(w0) / 4."""
    f = sweep.freqs
    if f.size < 5:
        raise ExtractionError("need at least 5 sweep points for group delay")
    s = sweep.S[:, port - 1, port - 1]
    phase = np.unwrap(np.angle(s))
    step = np.abs(np.diff(phase))
    if step.max() >= math.pi / 2:
        raise ExtractionError(
            f"phase step {step.max():.3f} rad exceeds pi/2 near {f[int(step.argmax())]:.6g} Hz; densify the sweep"
        )
    if abs(phase[-1] - phase[0]) < math.pi / 2:
        raise ExtractionError("no resonance: reflection phase is flat across the sweep")
    tau = -np.gradient(phase, 2 * np.pi * f)
    peaks = [i for i in _interior_maxima(tau) if tau[i] > 0]
    if not peaks:
        raise ExtractionError("group delay has no interior maximum")
    if f0_hint is None:
        i = max(peaks, key=lambda j: tau[j])
    else:
        i = min(peaks, key=lambda j: abs(f[j] - f0_hint))
    fp, tp = _parabola_vertex(f, tau, i)
    return ExtractionResult("Qe", 2 * math.pi * fp * tp / 4, fp, {"freqs": f, "group_delay": tau})


def coupling_from_peaks(f1: float, f2: float) -> float:
    """Coupling coefficient of a synchronous pair from its two split peaks."""
    lo, hi = sorted((f1, f2))
    return (hi * hi - lo * lo) / (hi * hi + lo * lo)


def k_from_split_peaks(sweep: SParamSweep, f0_hint: float | None = None) -> ExtractionResult:
    """Coupling of a weakly loaded resonator pair from the peaks of |S21|."""
    if sweep.n_ports < 2:
        raise ExtractionError("split-peak extraction needs a two-port sweep")
    f = sweep.freqs
    with np.errstate(divide="ignore"):
        y = 20 * np.log10(np.abs(sweep.S[:, 1, 0]))
    peaks = _interior_maxima(y)
    if len(peaks) != 2:
        raise ExtractionError(f"expected two |S21| peaks, found {len(peaks)}")
    (f1, _), (f2, _) = (_parabola_vertex(f, y, i) for i in peaks)
    k = coupling_from_peaks(f1, f2)
    return ExtractionResult("k", k, math.sqrt(f1 * f2), {"freqs": f, "s21_db": y, "peaks": (f1, f2)})


@dataclass(frozen=True)
class TuneTargets:
    rl_min: float
    ratios: tuple[float, ...]
    band: tuple[float, float]
    max_iterations: int = 200
    tolerance: float = 1e-10
    points: int = 401

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        if not self.rl_min > 0:
            raise InvalidSpecError(f"rl_min must be positive, got {self.rl_min}")
        if not self.band[0] < self.band[1]:
            raise InvalidSpecError(f"band must satisfy f_lo < f_hi, got {self.band}")
        if not self.ratios or any(not r > 0 for r in self.ratios):
            raise InvalidSpecError(f"target ratios must be positive, got {self.ratios}")
        if self.max_iterations < 1:
            raise InvalidSpecError("max_iterations must be at least 1")


@dataclass(frozen=True)
class TuneResult:
    network: CouplingNetwork
    converged: bool
    cost: float
    initial_cost: float
    evaluations: int
    history: tuple[float, ...]  # cost of each accepted (improving) iterate


class _Stop(Exception):
    pass


def tune_residuals(net: CouplingNetwork, targets: TuneTargets, freqs=None) -> np.ndarray:
    """Residual vector whose squared norm is the tuning cost.

    One hinge term per band point, ``max(0, |S11|dB + rl_min)``, and one
    relative split error per output port and band point. Split powers are
    scaled so they sum to the target total; the split terms are weighted so
    each port contributes as much as a single band-averaged term would.
    """
    if freqs is None:
        freqs = np.linspace(targets.band[0], targets.band[1], targets.points)
    if len(targets.ratios) != net.n_ports - 1:
        raise InvalidSpecError(f"{len(targets.ratios)} target ratios for {net.n_ports - 1} outputs")
    S = sparameters(net, freqs).S
    with np.errstate(divide="ignore"):
        s11_db = 20 * np.log10(np.abs(S[:, 0, 0]))
    hinge = np.maximum(0.0, s11_db + targets.rl_min)
    power = np.abs(S[:, 1:, 0]) ** 2
    t = np.asarray(targets.ratios)
    measured = power / power.sum(axis=1, keepdims=True) * t.sum()
    split = (measured - t) / t / math.sqrt(len(freqs))
    return np.concatenate([hinge, split.ravel()])


def tune_cost(net: CouplingNetwork, targets: TuneTargets) -> float:
    r = tune_residuals(net, targets)
    return float(r @ r)


def _tie_groups(values, rtol=1e-12):
    """Group indices of values that are equal within ``rtol``."""
    groups = []
    for i, v in enumerate(values):
        for g in groups:
            ref = values[g[0]]
            if abs(abs(v) - abs(ref)) <= rtol * max(abs(v), abs(ref)):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def tune(net: CouplingNetwork, targets: TuneTargets, tie_equal: bool = True) -> TuneResult:
    """Least-squares retuning of coupling magnitudes and port loads.

    Each nonzero coupling and each port load is scaled by ``exp(x)``, so
    signs and topology are preserved. With ``tie_equal`` the entries that
    start out equal in magnitude (identical branches, equal port loads)
    share one parameter and stay equal. Stops once the cost is at most
    ``targets.tolerance`` or after ``targets.max_iterations`` cost
    evaluations, and always returns the best network seen.
    """
    edges = net.edges()
    m0 = np.array([net.M[i, j] for i, j in edges])
    r0 = np.array([p.r for p in net.ports])
    freqs = np.linspace(targets.band[0], targets.band[1], targets.points)
    if tie_equal:
        groups = _tie_groups(m0) + [[len(m0) + i for i in g] for g in _tie_groups(r0)]
    else:
        groups = [[i] for i in range(len(m0) + len(r0))]
    expand = np.zeros((len(m0) + len(r0), len(groups)))
    for j, g in enumerate(groups):
        expand[g, j] = 1.0
    ne = len(edges)

    def build(x):
        z = expand @ x
        M = np.zeros_like(net.M)
        for (i, j), v in zip(edges, m0 * np.exp(z[:ne])):
            M[i, j] = M[j, i] = v
        return net.with_couplings(M, r0 * np.exp(z[ne:]))

    best = {"x": np.zeros(len(groups)), "cost": math.inf}
    history = []
    count = 0

    def fun(x):
        nonlocal count
        if count >= targets.max_iterations:
            raise _Stop
        count += 1
        res = tune_residuals(build(x), targets, freqs)
        cost = float(res @ res)
        if cost < best["cost"]:
            best["x"], best["cost"] = x.copy(), cost
            history.append(cost)
        if cost <= targets.tolerance:
            raise _Stop
        return res

    try:
        fun(best["x"])
        optimize.least_squares(
            fun, best["x"].copy(), method="trf", diff_step=1e-6,
            xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=10 * targets.max_iterations,
        )
    except _Stop:
        pass
    return TuneResult(
        network=build(best["x"]),
        converged=best["cost"] <= targets.tolerance,
        cost=best["cost"],
        initial_cost=history[0],
        evaluations=count,
        history=tuple(history),
    )
