import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RDLAB_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "rdlab._kernels._fast",
                    ["src/rdlab/_kernels/_fast.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # Pure-Python fallback is selected at import time; the extension
        # is an optimization, not a requirement.
        ext_modules = []

setup(ext_modules=ext_modules)
