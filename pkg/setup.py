"""Build script: compiles the optional kernel-evaluation extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed.
"""

import sys

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "okreg._ckern",
                ["src/okreg/_ckern.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"okreg: skipping compiled kernel core ({exc})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
