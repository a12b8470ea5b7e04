"""Coupling-matrix networks and their multiport scattering response.

Resonators are indexed from 0. In a divider built by :func:`build_fpd_network`
resonator 0 is the common resonator and branch ``i`` occupies resonators
``2i+1`` and ``2i+2``.

Coupling entries are stored as physical coupling coefficients (e.g. 0.031);
the sweep works in the lowpass domain where they are divided by the
fractional bandwidth, matching the normalised external loads ``r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DomainError, InvalidInputError, InvalidSpecError, SingularSystemError
from .prototype import CouplingPlan


@dataclass(frozen=True)
class Port:
    resonator: int
    r: float  # normalised load 1/(Qe*FBW)


class CouplingNetwork:
    """Synchronously tuned resonator network with resistive port loads.

    ``ports[p]`` is port ``p+1`` in S-parameter numbering.
    """

    def __init__(self, M, ports, f0: float, fbw: float):
        M = np.array(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidSpecError(f"coupling matrix must be square, got shape {M.shape}")
        if not np.array_equal(M, M.T):
            raise InvalidSpecError("coupling matrix must be symmetric")
        if np.any(np.diag(M) != 0):
            raise InvalidSpecError("synchronous tuning requires a zero diagonal")
        ports = tuple(p if isinstance(p, Port) else Port(int(p[0]), float(p[1])) for p in ports)
        if not ports:
            raise InvalidSpecError("network needs at least one port")
        seen = set()
        for p in ports:
            if not 0 <= p.resonator < M.shape[0]:
                raise InvalidSpecError(f"port attached to missing resonator {p.resonator}")
            if p.resonator in seen:
                raise InvalidSpecError(f"resonator {p.resonator} carries more than one port")
            if not p.r > 0:
                raise InvalidSpecError(f"port loads must be positive, got {p.r}")
            seen.add(p.resonator)
        if not f0 > 0 or not 0 < fbw < 1:
            raise InvalidSpecError(f"invalid f0={f0} or fbw={fbw}")
        M.setflags(write=False)
        self.M = M
        self.ports = ports
        self.f0 = float(f0)
        self.fbw = float(fbw)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def n_ports(self) -> int:
        return len(self.ports)

    def qe(self, port: int) -> float:
        """External quality factor of 0-based ``port``."""
        return 1.0 / (self.ports[port].r * self.fbw)

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.M))
        return list(zip(i.tolist(), j.tolist()))

    def with_couplings(self, M=None, r=None) -> "CouplingNetwork":
        """Copy with a replaced coupling matrix and/or port loads."""
        M = self.M if M is None else M
        ports = self.ports if r is None else [Port(p.resonator, float(x)) for p, x in zip(self.ports, r)]
        return CouplingNetwork(M, ports, self.f0, self.fbw)

    def __eq__(self, other):
        if not isinstance(other, CouplingNetwork):
            return NotImplemented
        return (
            np.array_equal(self.M, other.M)
            and self.ports == other.ports
            and self.f0 == other.f0
            and self.fbw == other.fbw
        )

    def __repr__(self):
        return f"CouplingNetwork(n={self.n}, ports={len(self.ports)}, f0={self.f0:g}, fbw={self.fbw:g})"


@dataclass(frozen=True, eq=False)
class SParamSweep:
    """S-matrices ``S[k, q, p]`` on an ascending frequency grid."""

    freqs: np.ndarray
    S: np.ndarray
    z_ref: float = 50.0

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float).reshape(-1)
        S = np.asarray(self.S, dtype=complex)
        if S.ndim != 3 or S.shape[0] != f.size or S.shape[1] != S.shape[2]:
            raise InvalidInputError(f"S shape {S.shape} inconsistent with {f.size} frequencies")
        if f.size == 0:
            raise InvalidInputError("empty sweep")
        if np.any(np.diff(f) <= 0):
            raise InvalidInputError("frequencies must be strictly increasing")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "S", S)

    @property
    def n_ports(self) -> int:
        return self.S.shape[1]

    def s(self, q: int, p: int) -> np.ndarray:
        """1-based ``S_qp`` trace."""
        return self.S[:, q - 1, p - 1]

    def db(self, q: int, p: int) -> np.ndarray:
        return 20.0 * np.log10(np.abs(self.s(q, p)))


def build_fpd_network(plan: CouplingPlan, f0: float | None = None) -> CouplingNetwork:
    """Common resonator feeding one two-resonator branch per output port."""
    f0 = plan.f0 if f0 is None else f0
    if f0 is None:
        raise InvalidSpecError("centre frequency required (plan carries none)")
    nb = plan.branches
    n = 1 + 2 * nb
    M = np.zeros((n, n))
    for i, m in enumerate(plan.m_split):
        a, b = 2 * i + 1, 2 * i + 2
        M[0, a] = M[a, 0] = m
        M[a, b] = M[b, a] = plan.m_branch
    ports = [Port(0, 1.0 / (plan.qe_in * plan.fbw))]
    ports += [Port(2 * i + 2, 1.0 / (q * plan.fbw)) for i, q in enumerate(plan.qe_out)]
    return CouplingNetwork(M, ports, f0, plan.fbw)


def lowpass_map(f, f0: float, fbw: float):
    """Narrowband bandpass-to-lowpass frequency variable."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise DomainError("frequency must be positive")
    lam = (f_arr / f0 - f0 / f_arr) / fbw
    return float(lam) if np.ndim(f) == 0 else lam


def band_edges(f0: float, fbw: float) -> tuple[float, float]:
    """Frequencies where the lowpass variable equals -1 and +1."""
    h = fbw / 2
    root = math.sqrt(1 + h * h)
    return f0 * (root - h), f0 * (root + h)


def system_matrices(net: CouplingNetwork, freqs, qu: float | None = None) -> np.ndarray:
    """Stack of ``lambda' I - jR + M/FBW`` for each frequency."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if freqs.size == 0:
        raise InvalidInputError("empty frequency grid")
    if qu is not None and not qu > 0:
        raise InvalidSpecError(f"unloaded Q must be positive, got {qu}")
    lam = lowpass_map(freqs, net.f0, net.fbw).astype(complex)
    if qu is not None:
        lam = lam - 1j / (net.fbw * qu)
    base = net.M / net.fbw + 0j
    for p in net.ports:
        base[p.resonator, p.resonator] -= 1j * p.r
    A = np.broadcast_to(base, (freqs.size, net.n, net.n)).copy()
    idx = np.arange(net.n)
    A[:, idx, idx] += lam[:, None]
    return A


def sparameters(net: CouplingNetwork, freqs, qu: float | None = None, z_ref: float = 50.0) -> SParamSweep:
    """Multiport S-parameters of a coupling network over ``freqs``.

    Only the columns of the inverse that touch port resonators are solved.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    A = system_matrices(net, freqs, qu)
    res = [p.resonator for p in net.ports]
    r = np.array([p.r for p in net.ports])
    E = np.zeros((net.n, len(res)), dtype=complex)
    E[res, np.arange(len(res))] = 1.0
    X, bad = linalg.solve_batched(A, np.broadcast_to(E, (freqs.size,) + E.shape))
    if bad >= 0:
        raise SingularSystemError(
            f"coupling matrix singular at {freqs[bad]:.6g} Hz", frequency=float(freqs[bad])
        )
    Ainv = X[:, res, :]  # [k, q, p] = (A^-1)[e_q, e_p]
    S = 2j * np.sqrt(np.outer(r, r))[None] * Ainv
    S[:, np.arange(len(res)), np.arange(len(res))] += 1.0
    return SParamSweep(freqs, S, z_ref)


def default_grid(f0: float, points: int = 1601) -> np.ndarray:
    """Sweep of +-f0/13 around f0 (2.4-2.8 GHz for a 2.6 GHz design)."""
    return np.linspace(f0 - f0 / 13, f0 + f0 / 13, points)
