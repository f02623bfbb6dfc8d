"""Builds the optional compiled stream-fill kernels.

The package is fully functional without the extension: terank.rng falls
back to the pure-Python kernels at import time. The extension is marked
optional so a missing compiler never breaks installation.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "terank._splitmix",
                ["src/terank/_splitmix.pyx"],
                # The pure-Python fallback must stay bit-identical: no
                # fused multiply-adds, and no sin+cos -> sincos() fusion
                # (glibc sincos differs from separate calls by 1 ulp).
                extra_compile_args=[
                    "-O3",
                    "-ffp-contract=off",
                    "-fno-builtin-sin",
                    "-fno-builtin-cos",
                    "-fno-builtin-sincos",
                ],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
