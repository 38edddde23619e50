"""Kernel backend selection.

The compiled extension is preferred when present; the NumPy fallback is used
otherwise. MHDLAB_KERNELS=pure|cython forces a backend (forcing "cython"
raises if the extension was not built).
"""

import os

from . import pure as _pure

_requested = os.environ.get("MHDLAB_KERNELS", "auto").lower()

if _requested not in ("auto", "pure", "cython"):
    raise RuntimeError(f"MHDLAB_KERNELS must be auto|pure|cython, not {_requested!r}")

if _requested == "pure":
    _impl = _pure
else:
    try:
        from . import _core as _impl
    except ImportError:
        if _requested == "cython":
            raise RuntimeError(
                "MHDLAB_KERNELS=cython but the compiled extension is missing; "
                "build it with `pip install -e .` or "
                "`python setup.py build_ext --inplace`") from None
        _impl = _pure

BACKEND = _impl.BACKEND_NAME

gradient = _impl.gradient
over_r = _impl.over_r
disk_tendency = _impl.disk_tendency
cylinder_tendency = _impl.cylinder_tendency
thomas = _impl.thomas


def get_backend(name):
    """Return a specific backend module ("pure" or "cython") for benchmarks."""
    if name == "pure":
        return _pure
    from . import _core
    return _core
