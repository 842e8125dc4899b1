import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "normalvote._kernels",
                sources=["src/normalvote/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError as exc:  # no Cython at build time: install pure-Python only
    warnings.warn(f"building without compiled kernels ({exc}); "
                  "the pure-Python backend will be used")

setup(ext_modules=ext_modules)
