"""Build script: compiles the optional Cython kernel.

The package works without the extension (a pure-Python twin is selected at
import time), so the build degrades gracefully when Cython or a C compiler
is unavailable, or when K3H_NO_EXT=1 is set.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("K3H_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "k3heights._kernel._core",
                    ["src/k3heights/_kernel/_core.pyx"],
                    extra_compile_args=["-O2"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
