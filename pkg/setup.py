import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; _accel falls back to numpy
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("ginprod._core", ["src/ginprod/_core.pyx"],
                   include_dirs=[np.get_include()])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
