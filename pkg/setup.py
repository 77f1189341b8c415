"""Build script. The compiled kernel extension is optional: if Cython or a C
compiler is unavailable the package falls back to the pure-Python kernels at
import time."""

from setuptools import setup, Extension

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "bicontact_lab._kernels",
                ["src/bicontact_lab/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    import warnings

    warnings.warn(f"building without compiled kernels ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
