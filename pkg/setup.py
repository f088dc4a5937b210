"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a vectorized numpy
fallback is selected at import time); building it just makes the hot loops
(propagation, discord measurement scans) much faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "excitonkit._kernels",
                ["src/excitonkit/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
