"""Build script: compiles the optional accelerator extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here is demoted to a warning instead of
aborting the install.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "monodeg._kernels",
                ["src/monodeg/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # missing compiler or cython: fall back to pure python
    warnings.warn(f"skipping compiled kernels, using numpy fallback ({exc})")
    ext_modules = []

setup(ext_modules=ext_modules)
