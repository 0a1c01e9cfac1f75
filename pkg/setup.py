"""Build script.  The compiled stencil kernels are optional: if Cython or a C
compiler is missing the install still succeeds and the package falls back to
the pure-numpy kernels at import time."""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"WARNING: compiled kernels skipped ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(
                f"WARNING: {ext.name} failed to build ({exc}); "
                "the pure-Python kernels will be used",
                file=sys.stderr,
            )


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"WARNING: compiled kernels skipped ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "nematic_walls._stencils",
        ["src/nematic_walls/_stencils.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
