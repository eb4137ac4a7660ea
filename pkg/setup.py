"""Build hook: compile the Cython kernel when Cython is available.

The package works without it; ``dadj.kernel`` falls back to the pure-Python
implementation at import time.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("DADJ_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(["src/dadj/_ckernel.pyx"], language_level=3, quiet=True)

setup(ext_modules=ext_modules)
