import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DUO_STANDBY_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "duo_standby._sim_core",
                    ["src/duo_standby/_sim_core.pyx"],
                    # no FMA contraction: results must match the Python kernel bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
