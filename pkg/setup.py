import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SCENRUN_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        import numpy as np

        extensions = [
            Extension(
                "scenrun.sim._kernels",
                ["src/scenrun/sim/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # no contraction: the compiled kernels must match the Python twin bit for bit
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
