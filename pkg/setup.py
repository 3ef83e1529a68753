"""Build script: compiles the optional LCS speedup extension when Cython is
available. The package works without it (pure-Python kernel is selected at
import time), so the extension is strictly best-effort."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("TEMPLATIC_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/templatic/_kernels/_speedups.pyx"],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
