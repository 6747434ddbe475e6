"""Build script. The compiled simulation core is optional: if Cython or a C
compiler is unavailable the package installs anyway and falls back to the
pure numpy engine at import time."""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "synsampler.engine._core",
                ["src/synsampler/engine/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - degraded build path
    sys.stderr.write(f"warning: building without compiled core ({exc})\n")

setup(ext_modules=ext_modules)
