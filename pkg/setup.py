"""Build script: compiles the optional sum-tree kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed on scalar tree
operations.  Build in place with:

    python3 setup.py build_ext --inplace
"""

import numpy
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "sublinsolve.kernels._ctree",
                sources=["src/sublinsolve/kernels/_ctree.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
