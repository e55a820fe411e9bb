import os

from setuptools import setup

# The compiled kernels are optional: the package falls back to the pure-Python
# implementations when the extension is absent. LAMCYCLE_NO_EXT=1 skips the build.
ext_modules = []
if not os.environ.get("LAMCYCLE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "lamcycle._cykernels",
                    ["src/lamcycle/_cykernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
