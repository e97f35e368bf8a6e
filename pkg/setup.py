"""Build script for the optional compiled quadrature kernel.

The package is fully functional without the extension: a NumPy fallback with
the same interface is selected at import time (see tubeflood._kernels).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    extensions = []
else:
    extensions = cythonize(
        [
            Extension(
                "tubeflood._kernels._fast",
                ["src/tubeflood/_kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
