"""Kernel backend selection.

Hot loops are written once as plain Python over scalars and compiled with
``numba.njit`` when numba is importable and ``NILFLOW_BACKEND`` is not
``numpy``.  Most kernels also have a vectorized numpy twin; `kernels`
dispatches between the two through :func:`active`.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_requested = os.environ.get("NILFLOW_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"NILFLOW_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

_state = {"backend": _requested if numba is not None else "numpy"}


def njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, fastmath=False)(fn)


def jitable(fn):
    """Plain Python function that njit kernels may also call (compiled inline there)."""
    if numba is None:
        return fn
    from numba.extending import register_jitable
    return register_jitable(fn)


def active():
    return _state["backend"]


def set_backend(name):
    """Switch the dispatch target at runtime (tests and benchmarks)."""
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not available")
    _state["backend"] = name


def precision_budget():
    """Absolute phase-error budget; ``NILFLOW_PRECISION`` overrides 1e-9."""
    raw = os.environ.get("NILFLOW_PRECISION")
    if not raw:
        return 1e-9
    value = float(raw)
    if not (0.0 < value < 1.0):
        raise ValueError(f"NILFLOW_PRECISION must lie in (0, 1), got {raw!r}")
    return value


def subanchor_interval(budget=None):
    """Steps between double-double re-anchors of a complex rotation.

    Between re-anchors the rotated term drifts by about k**2 * eps after k
    steps, so a block of L terms contributes about L**3 * eps / 3 to a sum.
    Pick the largest power of two keeping that a factor 8 below the budget.
    """
    if budget is None:
        budget = precision_budget()
    eps = 2.0 ** -52
    L = 8
    while L < (1 << 16) and (2 * L) ** 3 * eps * 8 <= budget:
        L *= 2
    return L


ANCHOR_INTERVAL = 1 << 20
