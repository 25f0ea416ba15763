"""Build the optional Cython kernels; the package falls back to pure Python without them."""
import os
import warnings

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MMKGQA_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython/numpy not found; installing without compiled kernels.")
    else:
        ext = Extension(
            name="mmkgqa._kernels",
            sources=["src/mmkgqa/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
