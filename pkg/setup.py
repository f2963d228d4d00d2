import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled module only hosts the explicit-stepping hot loop; everything
# else is plain Python. pmelab.kernels falls back to the NumPy implementation
# when the extension is absent, so a failed build is not fatal to the package.
extensions = [
    Extension(
        "pmelab._kernels",
        ["src/pmelab/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
