"""Build script for the optional Cython solver kernel.

The package works without a C compiler: if Cython is missing or the
extension fails to compile, ``fpdsynth.linalg`` falls back to the numpy
implementation at import time.
"""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "fpdsynth._csolve",
                ["src/fpdsynth/_csolve.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
