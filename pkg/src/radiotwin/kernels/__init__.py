"""Hot numeric kernels with interchangeable numba and numpy backends.

Every kernel exists in two implementations with identical signatures and
identical selection/tie-break logic:

* :mod:`radiotwin.kernels.numba_impl` - explicit loops under ``@njit``
* :mod:`radiotwin.kernels.numpy_impl` - vectorized numpy

``RADIOTWIN_BACKEND`` (see :mod:`radiotwin.backend`) picks one at import
time.  ``benchmarks/kernel_bench.py`` times the two side by side.
"""

from ..backend import USE_NUMBA, active_backend

if USE_NUMBA:
    from . import numba_impl as _impl
else:
    from . import numpy_impl as _impl

rbf_predict = _impl.rbf_predict
tree_ensemble_predict = _impl.tree_ensemble_predict
best_split = _impl.best_split
inverse_cdf = _impl.inverse_cdf
cdf_eval = _impl.cdf_eval
smo_solve = _impl.smo_solve

__all__ = [
    "active_backend",
    "rbf_predict",
    "tree_ensemble_predict",
    "best_split",
    "inverse_cdf",
    "cdf_eval",
    "smo_solve",
]
