"""Build the optional compiled kernels.

The package works without them: ``treebound._backend`` falls back to the
pure-Python kernels when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("TREEBOUND_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "treebound._ckernels",
                    ["src/treebound/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # FMA contraction would break bit-parity with the fallback
                    extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
