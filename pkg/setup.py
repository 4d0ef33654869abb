"""Optional compiled kernels; the package falls back to numpy without them."""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler, no headers, ...
            print(f"warning: compiled kernels not built ({exc}); using the numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); using the numpy fallback")


ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("tauberkit._kernels", ["src/tauberkit/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
