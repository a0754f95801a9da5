"""Build script: compiles the optional Cython sweep kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so any build failure here is demoted to a warning.
"""

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
                "flatflow._kernels._sweeps",
                ["src/flatflow/_kernels/_sweeps.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps the arithmetic bit-identical to the
                # NumPy fallback (no fused multiply-add contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(
        "flatflow: Cython extension not built (%s); using NumPy fallback\n" % exc
    )
    ext_modules = []

setup(ext_modules=ext_modules)
