"""Build script for the optional compiled sampling kernel.

The extension is a pure speedup: if Cython or a C toolchain is missing
the build proceeds without it and the package falls back to the Python
kernel at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "stepmark._kernels._core",
                ["src/stepmark/_kernels/_core.pyx"],
                # parity with the pure backend requires strict FP semantics
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
