"""Backend selection for the hot kernels.

The compiled extension is preferred; ``GINPROD_PURE=1`` forces the numpy
fallback (used by the benchmark and by the backend-agreement tests).
"""
import os

from . import _core_py

BACKEND = "python"
_impl = _core_py
if os.environ.get("GINPROD_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _core_py

loggamma = _impl.loggamma
cauchy_bilinear = _impl.cauchy_bilinear
cauchy_matrix_apply = _impl.cauchy_matrix_apply
