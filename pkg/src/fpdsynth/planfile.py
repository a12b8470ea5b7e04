"""Plan files: a JSON document holding a divider design end to end."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import CouplingNetwork, Port
from .errors import FileFormatError, FpdError
from .prototype import CouplingPlan, DividerSpec, GValues

SCHEMA = "fpdsynth-plan/1"


@dataclass(frozen=True)
class PlanFile:
    spec: DividerSpec
    g: GValues
    plan: CouplingPlan
    network: CouplingNetwork


def plan_to_dict(pf: PlanFile) -> dict:
    net = pf.network
    return {
        "schema": SCHEMA,
        "spec": {
            "f0": pf.spec.f0,
            "fbw": pf.spec.fbw,
            "z0": pf.spec.z0,
            "ratios": list(pf.spec.ratios),
            "order": pf.spec.order,
            "ripple_db": pf.spec.ripple_db,
        },
        "g_values": list(pf.g.g),
        "coupling_plan": {
            "m_branch": pf.plan.m_branch,
            "m_split": list(pf.plan.m_split),
            "qe_in": pf.plan.qe_in,
            "qe_out": list(pf.plan.qe_out),
            "fbw": pf.plan.fbw,
            "f0": pf.plan.f0,
        },
        "network": {
            "n": net.n,
            "f0": net.f0,
            "fbw": net.fbw,
            "couplings": [[i, j, float(net.M[i, j])] for i, j in net.edges()],
            "ports": [{"resonator": p.resonator, "r": p.r} for p in net.ports],
        },
    }


def dumps_plan(pf: PlanFile) -> str:
    return json.dumps(plan_to_dict(pf), indent=2) + "\n"


def _field(d, key, kind, path):
    where = f"{path}.{key}" if path else key
    if not isinstance(d, dict) or key not in d:
        raise FileFormatError(f"plan schema error: missing field '{where}'")
    v = d[key]
    if kind is float:
        ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    elif kind is int:
        ok = isinstance(v, int) and not isinstance(v, bool)
    else:
        ok = isinstance(v, kind)
    if not ok:
        raise FileFormatError(f"plan schema error: field '{where}' has wrong type {type(v).__name__}")
    return v


def _floats(d, key, path):
    v = _field(d, key, list, path)
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise FileFormatError(f"plan schema error: field '{path}.{key}' must hold numbers")
    return [float(x) for x in v]


def plan_from_dict(d: dict) -> PlanFile:
    schema = _field(d, "schema", str, "")
    if schema != SCHEMA:
        raise FileFormatError(f"plan schema error: field 'schema' is {schema!r}, expected {SCHEMA!r}")
    s = _field(d, "spec", dict, "")
    c = _field(d, "coupling_plan", dict, "")
    n = _field(d, "network", dict, "")
    try:
        spec = DividerSpec(
            f0=float(_field(s, "f0", float, "spec")),
            fbw=float(_field(s, "fbw", float, "spec")),
            z0=float(_field(s, "z0", float, "spec")),
            ratios=tuple(_floats(s, "ratios", "spec")),
            order=_field(s, "order", int, "spec"),
            ripple_db=float(_field(s, "ripple_db", float, "spec")),
        )
        g = GValues(tuple(_floats(d, "g_values", "")))
        f0 = c.get("f0")
        plan = CouplingPlan(
            m_branch=float(_field(c, "m_branch", float, "coupling_plan")),
            m_split=tuple(_floats(c, "m_split", "coupling_plan")),
            qe_in=float(_field(c, "qe_in", float, "coupling_plan")),
            qe_out=tuple(_floats(c, "qe_out", "coupling_plan")),
            fbw=float(_field(c, "fbw", float, "coupling_plan")),
            f0=None if f0 is None else float(f0),
        )
        size = _field(n, "n", int, "network")
        M = np.zeros((size, size))
        for k, entry in enumerate(_field(n, "couplings", list, "network")):
            if not (isinstance(entry, list) and len(entry) == 3):
                raise FileFormatError(f"plan schema error: field 'network.couplings[{k}]' must be [i, j, value]")
            i, j, v = entry
            if not (isinstance(i, int) and isinstance(j, int) and 0 <= i < size and 0 <= j < size and i != j):
                raise FileFormatError(f"plan schema error: field 'network.couplings[{k}]' has bad indices")
            M[i, j] = M[j, i] = float(v)
        ports = []
        for k, p in enumerate(_field(n, "ports", list, "network")):
            path = f"network.ports[{k}]"
            ports.append(Port(_field(p, "resonator", int, path), float(_field(p, "r", float, path))))
        net = CouplingNetwork(
            M, ports, float(_field(n, "f0", float, "network")), float(_field(n, "fbw", float, "network"))
        )
    except FileFormatError:
        raise
    except FpdError as exc:
        raise FileFormatError(f"plan schema error: {exc}") from None
    return PlanFile(spec, g, plan, net)


def loads_plan(text: str) -> PlanFile:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"plan is not valid JSON: {exc}") from None
    return plan_from_dict(d)


def write_plan(pf: PlanFile, path) -> Path:
    path = Path(path)
    path.write_text(dumps_plan(pf))
    return path


def read_plan(path) -> PlanFile:
    return loads_plan(Path(path).read_text())
