"""Kernel backend selection.

Hot sampling loops have two implementations: numba-jitted kernels and a
vectorized pure-numpy path.  Both consume the same counter-based random
stream, so results are bit-identical across backends.

The backend is chosen by the environment variable CRITSHUFFLE_BACKEND:

* ``auto`` (default): numba if importable, else numpy
* ``numba``: require numba, raise if missing
* ``numpy``: force the pure-numpy path
"""

import os

_ENV_VAR = "CRITSHUFFLE_BACKEND"

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def backend_choice() -> str:
    """Resolve the active kernel backend name ('numba' or 'numpy')."""
    mode = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if mode not in ("auto", "numba", "numpy"):
        raise ValueError(f"invalid {_ENV_VAR}={mode!r}; expected auto|numba|numpy")
    if mode == "numpy":
        return "numpy"
    if mode == "numba":
        if not HAS_NUMBA:
            raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")
        return "numba"
    return "numba" if HAS_NUMBA else "numpy"


def use_numba() -> bool:
    return backend_choice() == "numba"
