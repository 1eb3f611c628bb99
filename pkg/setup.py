"""Build script: compiles the optional C snapshot kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any failure here degrades the install instead
of breaking it.
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "imtsar._core",
                ["src/imtsar/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # Cython or numpy missing: pure-Python install
    print(f"warning: skipping C kernel build ({exc}); "
          "the NumPy backend will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
