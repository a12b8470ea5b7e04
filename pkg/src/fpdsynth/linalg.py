"""Batched small dense complex solves.

Every frequency sweep in the package reduces to one small system per
frequency point. The compiled kernel in ``_csolve`` is used when it was
built; otherwise the vectorised numpy elimination below runs the same
algorithm (partial pivoting, identical singularity test).
"""
from __future__ import annotations

import numpy as np

try:
    from . import _csolve
except ImportError:  # extension not built
    _csolve = None

#: Relative pivot threshold below which a system is declared singular.
PIVOT_RTOL = 1e-12

BACKENDS = ("cython", "numpy") if _csolve is not None else ("numpy",)
_backend = BACKENDS[0]


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    """Select the solver backend (``"cython"`` or ``"numpy"``)."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; choose from {BACKENDS}")
    _backend = name


def _solve_batched_numpy(A: np.ndarray, B: np.ndarray, rtol: float):
    a = np.array(A, dtype=np.complex128, copy=True)
    x = np.array(B, dtype=np.complex128, copy=True)
    nf, n, _ = a.shape
    rows = np.arange(nf)
    scale = np.abs(a).reshape(nf, -1).max(axis=1)
    singular = np.zeros(nf, dtype=bool)
    for k in range(n):
        p = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        best = np.abs(a[rows, p, k])
        # keep eliminating the others so the lowest failing index is reported
        dead = best <= rtol * scale
        if dead.any():
            singular |= dead
            a[dead, k, k] = 1.0
            p[dead] = k
        swap = p != k
        if swap.any():
            r, pr = rows[swap], p[swap]
            a[r, k], a[r, pr] = a[r, pr].copy(), a[r, k].copy()
            x[r, k], x[r, pr] = x[r, pr].copy(), x[r, k].copy()
        fac = a[:, k + 1 :, k] / a[:, k, k][:, None]
        a[:, k + 1 :, k:] -= fac[:, :, None] * a[:, None, k, k:]
        x[:, k + 1 :, :] -= fac[:, :, None] * x[:, None, k, :]
    for k in range(n - 1, -1, -1):
        acc = x[:, k, :] - np.einsum("fi,fij->fj", a[:, k, k + 1 :], x[:, k + 1 :, :])
        x[:, k, :] = acc / a[:, k, k][:, None]
    if singular.any():
        return x, int(np.flatnonzero(singular)[0])
    return x, -1


def solve_batched(A: np.ndarray, B: np.ndarray, rtol: float = PIVOT_RTOL, backend: str | None = None):
    """Solve ``A[f] @ X[f] = B[f]`` for a stack of systems.

    Parameters
    ----------
    A : (F, n, n) complex array
    B : (F, n, m) complex array
    rtol : relative pivot threshold
    backend : override the module-level backend for this call

    Returns
    -------
    X : (F, n, m) complex array
    bad : index of the first singular system, or -1

    The caller decides how to report a singular system; this function never
    raises for singularity so the frequency can be attached to the error.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 3 or A.shape[1] != A.shape[2] or B.shape[:2] != A.shape[:2]:
        raise ValueError(f"incompatible shapes {A.shape} and {B.shape}")
    name = backend or _backend
    if name == "cython":
        if _csolve is None:
            raise ValueError("cython backend not built")
        return _csolve.solve_batched(
            np.ascontiguousarray(A, dtype=np.complex128),
            np.ascontiguousarray(B, dtype=np.complex128),
            float(rtol),
        )
    return _solve_batched_numpy(A, B, rtol)
