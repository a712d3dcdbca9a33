"""Build script: compiles the Cython kernel extension when possible.

The extension is optional; without it the package falls back to the pure
Python kernels at import time.  Set KDVSYM_NO_EXT=1 to skip the build.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("KDVSYM_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/kdvsym/_kernels/_ckernel.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
