"""Hot trade loops: numba-jitted with a pure-Python fallback.

The same source functions back both paths, so the fallback is
bit-identical to the jitted code; only throughput differs (the jit is
worth roughly two orders of magnitude on the trade loop).  Selection:

* ``KINEX_BACKEND=numba``  force the jitted kernels (error if numba is missing)
* ``KINEX_BACKEND=numpy``  force the plain-Python loops over numpy arrays
* unset / ``auto``         jitted when numba imports, fallback otherwise

Each kernel consumes pre-drawn index/epsilon arrays, mutates ``money``
(and the imitation arrays) in place, and returns the largest per-trade
relative conservation error it saw so the caller can assert the
1e-12 per-trade tolerance without a branch in the loop.
"""
from __future__ import annotations

import math
import os

from .errors import KinexError

__all__ = ["get_kernels", "available_backends", "active_backend"]


def _run_cc(money, lam, ii, jj, eps):
    max_err = 0.0
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        s = money[i] + money[j]
        pool = (1.0 - lam) * s
        mi = lam * money[i] + eps[k] * pool
        mj = lam * money[j] + (1.0 - eps[k]) * pool
        money[i] = mi
        money[j] = mj
        err = abs((mi + mj) - s)
        if s > 0.0:
            err /= s
        if err > max_err:
            max_err = err
    return max_err


def _run_ccm(money, lam, ii, jj, eps):
    max_err = 0.0
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        s = money[i] + money[j]
        pool = (1.0 - lam[i]) * money[i] + (1.0 - lam[j]) * money[j]
        mi = lam[i] * money[i] + eps[k] * pool
        mj = lam[j] * money[j] + (1.0 - eps[k]) * pool
        money[i] = mi
        money[j] = mj
        err = abs((mi + mj) - s)
        if s > 0.0:
            err /= s
        if err > max_err:
            max_err = err
    return max_err


def _run_money_dependent(money, increasing, c1, c2, ii, jj, eps):
    max_err = 0.0
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        if increasing:
            li = c1 * (1.0 - math.exp(-c2 * money[i]))
            lj = c1 * (1.0 - math.exp(-c2 * money[j]))
        else:
            li = c1 * math.exp(-c2 * money[i])
            lj = c1 * math.exp(-c2 * money[j])
        s = money[i] + money[j]
        pool = (1.0 - li) * money[i] + (1.0 - lj) * money[j]
        mi = li * money[i] + eps[k] * pool
        mj = lj * money[j] + (1.0 - eps[k]) * pool
        money[i] = mi
        money[j] = mj
        err = abs((mi + mj) - s)
        if s > 0.0:
            err /= s
        if err > max_err:
            max_err = err
    return max_err


def _run_imitation(money, lam, strat, counts, ii, jj, eps, trades_before):
    max_err = 0.0
    consensus_at = -1
    n = money.shape[0]
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        s = money[i] + money[j]
        pool = (1.0 - lam[i]) * money[i] + (1.0 - lam[j]) * money[j]
        mi = lam[i] * money[i] + eps[k] * pool
        mj = lam[j] * money[j] + (1.0 - eps[k]) * pool
        money[i] = mi
        money[j] = mj
        err = abs((mi + mj) - s)
        if s > 0.0:
            err /= s
        if err > max_err:
            max_err = err
        if eps[k] >= 0.5:
            w, l = i, j
        else:
            w, l = j, i
        if strat[l] != strat[w]:
            counts[strat[l]] -= 1
            counts[strat[w]] += 1
            strat[l] = strat[w]
            lam[l] = lam[w]
            if consensus_at < 0 and counts[strat[w]] == n:
                consensus_at = trades_before + k + 1
    return consensus_at, max_err


_SOURCES = {
    "run_cc": _run_cc,
    "run_ccm": _run_ccm,
    "run_money_dependent": _run_money_dependent,
    "run_imitation": _run_imitation,
}

_BACKENDS: dict[str, dict] = {"numpy": dict(_SOURCES)}

try:
    import numba
except ImportError:
    numba = None
else:
    _BACKENDS["numba"] = {
        name: numba.njit(cache=True)(fn) for name, fn in _SOURCES.items()
    }


class Kernels:
    """The four trade loops of one backend."""

    def __init__(self, backend: str, fns: dict):
        self.backend = backend
        self.run_cc = fns["run_cc"]
        self.run_ccm = fns["run_ccm"]
        self.run_money_dependent = fns["run_money_dependent"]
        self.run_imitation = fns["run_imitation"]


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    """Backend the engine will use, honoring KINEX_BACKEND."""
    choice = os.environ.get("KINEX_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if "numba" in _BACKENDS else "numpy"
    if choice not in ("numba", "numpy"):
        raise KinexError(f"KINEX_BACKEND must be 'numba', 'numpy' or 'auto', got {choice!r}")
    if choice not in _BACKENDS:
        raise KinexError("KINEX_BACKEND=numba but numba is not importable")
    return choice


def get_kernels(backend: str | None = None) -> Kernels:
    """Kernels of the requested backend (default: ``active_backend()``)."""
    name = backend if backend is not None else active_backend()
    if name not in _BACKENDS:
        raise KinexError(f"unknown kernel backend {name!r}; have {available_backends()}")
    return Kernels(name, _BACKENDS[name])
