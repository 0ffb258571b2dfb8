"""Build script: compiles the optional fast kernel backend.

If Cython or a C compiler is unavailable the build still succeeds and the
package falls back to the numpy backend at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pragcomm.kernel._fastops",
                sources=["src/pragcomm/kernel/_fastops.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"pragcomm: skipping compiled kernels ({exc}); numpy backend will be used")

setup(ext_modules=ext_modules)
