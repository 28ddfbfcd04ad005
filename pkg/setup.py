"""Build script: compiles the optional kernel extension.

The package works without the extension (pure-Python kernels are selected
at import time), so a failed compile must not fail the install.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "ztchain._kernels._speedups",
                ["src/ztchain/_kernels/_speedups.pyx"],
            )
        ],
        language_level=3,
    )


class OptionalBuildExt(build_ext):
    """Tolerate a missing or broken C toolchain."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"kernel extension skipped: {exc}", stacklevel=1)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"kernel extension {ext.name} skipped: {exc}", stacklevel=1)


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
