"""Build the optional Cython kernel extension.

If Cython or a C compiler is unavailable the install still succeeds and the
package falls back to the pure-Python kernels at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "multigen._kernels._core",
                ["src/multigen/_kernels/_core.pyx"],
                # No -ffast-math / -march=native: the compiled kernels must be
                # bit-identical to the pure-Python fallback for replay hashes.
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
