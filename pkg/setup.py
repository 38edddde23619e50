"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a missing compiler or Cython must not break the
install. Any failure here downgrades to a pure-Python build with a warning.
"""

import sys

from setuptools import setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"mhdlab: Cython/NumPy unavailable ({exc}); building pure-Python only",
              file=sys.stderr)
        return []
    ext = Extension(
        "mhdlab._kernels._core",
        ["src/mhdlab/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


try:
    setup(ext_modules=_extensions())
except SystemExit:
    raise
except Exception as exc:  # compiler missing, etc.
    print(f"mhdlab: extension build failed ({exc}); retrying pure-Python",
          file=sys.stderr)
    setup(ext_modules=[])
