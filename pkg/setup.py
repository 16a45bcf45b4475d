"""Build hook for the optional compiled curvature kernels.

The package works without them: ``quasieinstein.kernels`` falls back to the
numpy implementation when the extension is missing.
"""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "quasieinstein._ckernels",
                ["src/quasieinstein/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
