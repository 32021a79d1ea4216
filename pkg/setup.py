from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "mlpicard._mlpcore",
                ["src/mlpicard/_mlpcore.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython available: install pure-Python only, the kernel selector
    # falls back at import time.
    extensions = []

setup(ext_modules=extensions)
