"""Numba/numpy backend selection for the hot numeric kernels.

The environment variable ``RADIOTWIN_BACKEND`` picks the implementation:

* ``auto`` (default) - use numba if it imports, else fall back to numpy
* ``numba``          - require numba, raise if it is missing
* ``numpy``          - force the pure-numpy implementations

Both backends implement the same kernel signatures; results agree to
floating-point rounding (reduction order differs), and every run is
bit-reproducible for a fixed backend.
"""

from __future__ import annotations

import os

_CHOICES = ("auto", "numba", "numpy")

BACKEND_ENV = "RADIOTWIN_BACKEND"

_requested = os.environ.get(BACKEND_ENV, "auto").strip().lower()
if _requested not in _CHOICES:
    raise RuntimeError(
        f"{BACKEND_ENV}={_requested!r} is not one of {_CHOICES}"
    )

if _requested in ("auto", "numba"):
    try:
        from numba import njit  # noqa: F401

        HAS_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise RuntimeError(
                f"{BACKEND_ENV}=numba but numba is not installed"
            ) from None
        HAS_NUMBA = False
else:
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _requested in ("auto", "numba")


def active_backend() -> str:
    """Name of the kernel backend actually in use ("numba" or "numpy")."""
    return "numba" if USE_NUMBA else "numpy"


if USE_NUMBA:
    from numba import njit as jit_kernel  # re-export for single-source kernels
else:

    def jit_kernel(*args, **kwargs):
        """Passthrough decorator when numba is disabled."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap
