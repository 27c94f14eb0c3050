"""Build script: compiles the simulation kernel when a C toolchain is present.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed.  Set KRONMEET_PURE=1 to
skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that degrades to a pure-Python install on compile failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            "kronmeet: building the compiled simulation kernel failed "
            f"({exc!r}); falling back to the pure-Python backend"
        )


ext_modules = []
cmdclass = {}
if os.environ.get("KRONMEET_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "kronmeet._simcore",
                    ["src/kronmeet/_simcore.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass["build_ext"] = optional_build_ext
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules, cmdclass=cmdclass)
