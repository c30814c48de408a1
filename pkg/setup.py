from Cython.Build import cythonize
import numpy as np
from setuptools import Extension, setup

DIRECTIVES = dict(
    language_level=3,
    boundscheck=False,
    wraparound=False,
    cdivision=True,
)

ext = Extension(
    "tactile_climb._kernels",
    ["src/tactile_climb/_kernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3"],
)

setup(ext_modules=cythonize([ext], compiler_directives=DIRECTIVES))
