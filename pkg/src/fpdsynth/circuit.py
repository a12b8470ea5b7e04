"""Lumped-element netlists and modified nodal analysis.

This is the independent check on the coupling-matrix engine: a coupling
network is realised as shunt LC resonators joined by ideal admittance
inverters, and its S-parameters are recomputed from node voltages.

Netlist grammar, one element per line, ``*`` starts a comment::

    R<name> n1 n2 <ohm>     L<name> n1 n2 <henry>   C<name> n1 n2 <farad>
    K<name> L<a> L<b> <k>   J<name> n1 n2 <siemens>  P<index> n1 0 <z0>

Values take scientific notation or one of the suffixes f p n u m k M G.
"""
from __future__ import annotations

import math
import re
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .engine import CouplingNetwork, SParamSweep
from .errors import DomainError, InvalidSpecError, NetlistError, SingularSystemError

SUFFIXES = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9}
_VALUE_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([fpnumkMG]?)$")
_NODE_RE = re.compile(r"^\d+$")
KINDS = "RLCKJP"


@dataclass(frozen=True)
class Element:
    kind: str
    name: str
    nodes: tuple[int, ...] = ()
    value: float = 0.0
    refs: tuple[str, ...] = ()  # coupled inductor names, K only


@dataclass(frozen=True)
class Netlist:
    elements: tuple[Element, ...]
    title: str = field(default="", compare=False)

    def of_kind(self, kind: str) -> list[Element]:
        return [e for e in self.elements if e.kind == kind]

    @property
    def ports(self) -> list[Element]:
        """Port elements ordered by port index."""
        return sorted(self.of_kind("P"), key=lambda e: int(e.name[1:]))

    @property
    def nodes(self) -> list[int]:
        return sorted({n for e in self.elements for n in e.nodes} - {0})


def parse_value(token: str) -> float:
    m = _VALUE_RE.match(token)
    if not m:
        raise ValueError(f"bad numeric value {token!r}")
    return float(m.group(1)) * SUFFIXES.get(m.group(2), 1.0)


def format_value(x: float) -> str:
    return repr(float(x))


def parse_netlist(text: str) -> Netlist:
    """Parse netlist text and validate references, values and connectivity."""
    elements = []
    names = set()
    pending_k = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("*", 1)[0].rstrip()
        if not line.strip():
            continue
        toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        name, col = toks[0]
        kind = name[0].upper()
        if kind not in KINDS:
            raise NetlistError(f"unknown element kind {name[0]!r}", lineno, col)
        name = name.upper()
        if len(toks) != 4:
            raise NetlistError(f"{name}: expected 3 fields after the name, got {len(toks) - 1}", lineno, col)
        if kind == "P" and not name[1:].isdigit():
            raise NetlistError(f"port name must be P<index>, got {name}", lineno, col)
        if len(name) < 2:
            raise NetlistError(f"element {name!r} has no name", lineno, col)
        if name in names:
            raise NetlistError(f"duplicate element name {name}", lineno, col)
        names.add(name)

        vtok, vcol = toks[3]
        try:
            value = parse_value(vtok)
        except ValueError as exc:
            raise NetlistError(str(exc), lineno, vcol) from None
        if not math.isfinite(value):
            raise NetlistError(f"{name}: non-finite value", lineno, vcol)

        if kind == "K":
            refs = tuple(t.upper() for t, _ in toks[1:3])
            for t, c in toks[1:3]:
                if t[0].upper() != "L":
                    raise NetlistError(f"{name}: {t} is not an inductor", lineno, c)
            if not -1 < value < 1:
                raise NetlistError(f"{name}: coupling coefficient must satisfy |k| < 1, got {value}", lineno, vcol)
            if refs[0] == refs[1]:
                raise NetlistError(f"{name}: an inductor cannot couple to itself", lineno, toks[1][1])
            pending_k.append((Element("K", name, (), value, refs), lineno, toks))
            continue

        nodes = []
        for t, c in toks[1:3]:
            if not _NODE_RE.match(t):
                raise NetlistError(f"{name}: node {t!r} is not a nonnegative integer", lineno, c)
            nodes.append(int(t))
        if kind in "RLCP" and value <= 0:
            what = "negative" if value < 0 else "zero"
            raise NetlistError(f"{name}: {what} value {vtok}", lineno, vcol)
        if kind == "P" and nodes[1] != 0:
            raise NetlistError(f"{name}: ports are referenced to ground (node 0)", lineno, toks[2][1])
        if nodes[0] == nodes[1]:
            raise NetlistError(f"{name}: both terminals on node {nodes[0]}", lineno, toks[1][1])
        elements.append(Element(kind, name, tuple(nodes), value))

    inductors = {e.name for e in elements if e.kind == "L"}
    for k, lineno, toks in pending_k:
        for (t, c), ref in zip(toks[1:3], k.refs):
            if ref not in inductors:
                raise NetlistError(f"{k.name}: dangling reference to {ref}", lineno, c)
        elements.append(k)

    net = Netlist(tuple(elements))
    _check_netlist(net)
    return net


def _check_netlist(net: Netlist) -> None:
    ports = net.of_kind("P")
    if not ports:
        raise NetlistError("netlist has no ports")
    idx = sorted(int(p.name[1:]) for p in ports)
    if idx != list(range(1, len(idx) + 1)):
        raise NetlistError(f"port indices must be 1..{len(idx)}, got {idx}")

    adj = defaultdict(set)
    by_name = {e.name: e for e in net.elements}
    for e in net.elements:
        if e.kind == "K":
            a, b = (set(by_name[r].nodes) - {0} for r in e.refs)
            for x in a:
                adj[x] |= b
            for x in b:
                adj[x] |= a
        elif e.kind != "P":
            n1, n2 = e.nodes
            adj[n1].add(n2)
            adj[n2].add(n1)
    # ground is the common return, not a path: a tank hanging from ground
    # alone is unreachable
    seen = {p.nodes[0] for p in ports}
    queue = deque(seen)
    while queue:
        for m in adj[queue.popleft()]:
            if m != 0 and m not in seen:
                seen.add(m)
                queue.append(m)
    missing = sorted(set(net.nodes) - seen)
    if missing:
        raise NetlistError(f"nodes not reachable from any port: {missing}")


def serialize_netlist(net: Netlist) -> str:
    lines = [f"* {net.title}"] if net.title else []
    for e in net.elements:
        if e.kind == "K":
            lines.append(f"{e.name} {e.refs[0]} {e.refs[1]} {format_value(e.value)}")
        else:
            lines.append(f"{e.name} {e.nodes[0]} {e.nodes[1]} {format_value(e.value)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MnaSystem:
    """Frequency-split MNA matrices: ``A(w) = A0 + j*w*A1``.

    Unknowns are node voltages (ground removed) followed by one branch
    current per inductor. ``B`` holds one Norton excitation column per port
    for a 1 V source behind the port impedance.
    """

    A0: np.ndarray
    A1: np.ndarray
    B: np.ndarray
    port_rows: tuple[int, ...]
    z0: tuple[float, ...]
    n_nodes: int

    def matrices(self, omega) -> np.ndarray:
        omega = np.atleast_1d(omega)
        return self.A0[None] + 1j * omega[:, None, None] * self.A1[None]


def build_mna(net: Netlist) -> MnaSystem:
    node_ix = {n: i for i, n in enumerate(net.nodes)}
    inductors = net.of_kind("L")
    nv = len(node_ix)
    size = nv + len(inductors)
    A0 = np.zeros((size, size), dtype=complex)
    A1 = np.zeros((size, size))

    def stamp(M, a, b, y):
        ia, ib = node_ix.get(a), node_ix.get(b)
        if ia is not None:
            M[ia, ia] += y
        if ib is not None:
            M[ib, ib] += y
        if ia is not None and ib is not None:
            M[ia, ib] -= y
            M[ib, ia] -= y

    branch = {}
    for e in net.elements:
        if e.kind == "R":
            stamp(A0, *e.nodes, 1.0 / e.value)
        elif e.kind == "C":
            stamp(A1, *e.nodes, e.value)
        elif e.kind == "J":
            ia, ib = (node_ix.get(n) for n in e.nodes)
            if ia is not None and ib is not None:
                A0[ia, ib] += 1j * e.value
                A0[ib, ia] += 1j * e.value
        elif e.kind == "P":
            stamp(A0, e.nodes[0], 0, 1.0 / e.value)
    for k, e in enumerate(inductors):
        row = nv + k
        branch[e.name] = (row, e.value)
        for n, sign in zip(e.nodes, (1.0, -1.0)):
            if n in node_ix:
                A0[node_ix[n], row] += sign
                A0[row, node_ix[n]] += sign
        A1[row, row] -= e.value
    for e in net.of_kind("K"):
        (ra, la), (rb, lb) = branch[e.refs[0]], branch[e.refs[1]]
        m = e.value * math.sqrt(la * lb)
        A1[ra, rb] -= m
        A1[rb, ra] -= m

    ports = net.ports
    B = np.zeros((size, len(ports)), dtype=complex)
    rows = []
    for j, p in enumerate(ports):
        r = node_ix[p.nodes[0]]
        B[r, j] = 1.0 / p.value
        rows.append(r)
    return MnaSystem(A0, A1, B, tuple(rows), tuple(p.value for p in ports), nv)


def sparams_mna(net: Netlist, freqs, z_ref: float | None = None) -> SParamSweep:
    """S-parameters from port voltages of the MNA solution."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if freqs.size == 0:
        raise DomainError("empty frequency grid")
    if np.any(freqs <= 0):
        raise DomainError("MNA sweep frequencies must be positive")
    sys_ = build_mna(net)
    A = sys_.matrices(2 * np.pi * freqs)
    X, bad = linalg.solve_batched(A, np.broadcast_to(sys_.B, (freqs.size,) + sys_.B.shape))
    if bad >= 0:
        raise SingularSystemError(
            f"MNA matrix singular at {freqs[bad]:.6g} Hz: floating subcircuit or "
            "resonant loop of ideal elements",
            frequency=float(freqs[bad]),
        )
    V = X[:, list(sys_.port_rows), :]  # [k, q, p] voltage at port q driven from p
    z0 = np.asarray(sys_.z0)
    S = 2.0 * V * np.sqrt(z0[None, None, :] / z0[None, :, None])
    n = len(z0)
    S[:, np.arange(n), np.arange(n)] -= 1.0
    if z_ref is None:
        z_ref = float(z0[0])
    return SParamSweep(freqs, S, z_ref)


def coupling_to_netlist(net: CouplingNetwork, c0: float, z0: float = 50.0) -> Netlist:
    """Shunt-LC resonators joined by admittance inverters.

    Resonator ``e`` sits on node ``e+1``; port ``p`` (1-based) on node ``n+p``.
    """
    if not c0 > 0:
        raise InvalidSpecError(f"resonator capacitance must be positive, got {c0}")
    if not z0 > 0:
        raise InvalidSpecError(f"port impedance must be positive, got {z0}")
    w0 = 2 * math.pi * net.f0
    l0 = 1.0 / (w0 * w0 * c0)
    els = []
    for e in range(net.n):
        els.append(Element("C", f"C{e + 1}", (e + 1, 0), c0))
        els.append(Element("L", f"L{e + 1}", (e + 1, 0), l0))
    for i, j in net.edges():
        els.append(Element("J", f"J{i + 1}_{j + 1}", (i + 1, j + 1), float(net.M[i, j]) * w0 * c0))
    for p, port in enumerate(net.ports, 1):
        node = net.n + p
        qe = 1.0 / (port.r * net.fbw)
        els.append(Element("J", f"JP{p}", (node, port.resonator + 1), math.sqrt(w0 * c0 / (qe * z0))))
        els.append(Element("P", f"P{p}", (node, 0), z0))
    out = Netlist(tuple(els), title=f"lumped realisation, f0={net.f0:.9g} Hz, C0={c0:.9g} F")
    _check_netlist(out)
    return out
