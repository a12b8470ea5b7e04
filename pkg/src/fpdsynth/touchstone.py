"""Touchstone v1 and CSV serialisation of S-parameter sweeps."""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .engine import SParamSweep
from .errors import FileFormatError

_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def _num(x: float) -> str:
    s = f"{x:.9f}"
    return "0.000000000" if s == "-0.000000000" else s


def _freq(f: float) -> str:
    return f"{f:.15g}"


def _pair_order(n: int):
    """(q, p) index order of one Touchstone record."""
    if n == 2:
        return [(0, 0), (1, 0), (0, 1), (1, 1)]
    return [(q, p) for q in range(n) for p in range(n)]


def format_touchstone(sweep: SParamSweep) -> str:
    n = sweep.n_ports
    lines = [f"! {n}-port S-parameters", f"# HZ S RI R {sweep.z_ref:g}"]
    order = _pair_order(n)
    for k, f in enumerate(sweep.freqs):
        S = sweep.S[k]
        pairs = [f"{_num(S[q, p].real)} {_num(S[q, p].imag)}" for q, p in order]
        if n <= 2:
            lines.append(" ".join([_freq(f)] + pairs))
            continue
        first = True
        for q in range(n):
            row = pairs[q * n : (q + 1) * n]
            for c in range(0, n, 4):
                chunk = " ".join(row[c : c + 4])
                lines.append(f"{_freq(f)} {chunk}" if first else chunk)
                first = False
    return "\n".join(lines) + "\n"


def write_touchstone(sweep: SParamSweep, path) -> Path:
    path = Path(path)
    path.write_text(format_touchstone(sweep))
    return path


def _ports_from_name(path: Path):
    m = re.fullmatch(r"\.s(\d+)p", path.suffix.lower())
    return int(m.group(1)) if m else None


def parse_touchstone(text: str, n_ports: int | None = None) -> SParamSweep:
    """Parse version-1 Touchstone text (RI, MA or DB data)."""
    unit, fmt, z_ref = 1e9, "MA", 50.0
    seen_option = False
    records = []  # (line number, tokens)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if seen_option:
                raise FileFormatError(f"line {lineno}: duplicate option line")
            seen_option = True
            toks = line[1:].upper().split()
            i = 0
            while i < len(toks):
                t = toks[i]
                if t in _UNITS:
                    unit = _UNITS[t]
                elif t in ("RI", "MA", "DB"):
                    fmt = t
                elif t == "S":
                    pass
                elif t in ("Y", "Z", "H", "G"):
                    raise FileFormatError(f"line {lineno}: only S-parameter data is supported, got {t}")
                elif t == "R":
                    try:
                        z_ref = float(toks[i + 1])
                    except (IndexError, ValueError):
                        raise FileFormatError(f"line {lineno}: malformed reference impedance") from None
                    i += 1
                else:
                    raise FileFormatError(f"line {lineno}: malformed option line, unknown token {t!r}")
                i += 1
            continue
        if not seen_option:
            raise FileFormatError(f"line {lineno}: data before the '#' option line")
        try:
            vals = [float(t) for t in line.split()]
        except ValueError:
            raise FileFormatError(f"line {lineno}: non-numeric data") from None
        if len(vals) % 2 == 1:
            records.append((lineno, vals))
        elif not records:
            raise FileFormatError(f"line {lineno}: continuation line without a frequency")
        else:
            records[-1][1].extend(vals)
    if not seen_option:
        raise FileFormatError("missing '#' option line")
    if not records:
        raise FileFormatError("no data records")

    if n_ports is None:
        width = len(records[0][1]) - 1
        n_ports = round(math.sqrt(width / 2))
    expected = 1 + 2 * n_ports * n_ports
    for lineno, vals in records:
        if len(vals) != expected:
            raise FileFormatError(
                f"line {lineno}: record has {len(vals)} values, expected {expected} for {n_ports} ports"
            )
    data = np.array([v for _, v in records])
    freqs = data[:, 0] * unit
    bad = np.flatnonzero(np.diff(freqs) <= 0)
    if bad.size:
        raise FileFormatError(f"line {records[bad[0] + 1][0]}: frequencies not ascending")
    a, b = data[:, 1::2], data[:, 2::2]
    if fmt == "RI":
        vals = a + 1j * b
    elif fmt == "MA":
        vals = a * np.exp(1j * np.deg2rad(b))
    else:
        vals = 10 ** (a / 20) * np.exp(1j * np.deg2rad(b))
    S = np.zeros((len(freqs), n_ports, n_ports), dtype=complex)
    for c, (q, p) in enumerate(_pair_order(n_ports)):
        S[:, q, p] = vals[:, c]
    return SParamSweep(freqs, S, z_ref)


def read_touchstone(path) -> SParamSweep:
    path = Path(path)
    return parse_touchstone(path.read_text(), _ports_from_name(path))


def format_csv(sweep: SParamSweep) -> str:
    """Magnitudes in dB, one column per S_qp ordered by source port."""
    n = sweep.n_ports
    cols = [(q, p) for p in range(n) for q in range(n)]
    header = ["freq_hz"] + [f"S{q + 1}{p + 1}_db" for q, p in cols]
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(np.abs(sweep.S))
    out = [",".join(header)]
    for k, f in enumerate(sweep.freqs):
        out.append(",".join([_freq(f)] + [f"{db[k, q, p]:.6f}" for q, p in cols]))
    return "\n".join(out) + "\n"


def write_csv(sweep: SParamSweep, path) -> Path:
    path = Path(path)
    path.write_text(format_csv(sweep))
    return path
