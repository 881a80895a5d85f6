import os

from setuptools import Extension, setup

# The compiled kernel is optional: without it the package falls back to the
# pure-Python implementation in topicforge._ngdpy (see topicforge.kernels).
ext_modules = []
if not os.environ.get("TOPIC_FORGE_NO_EXT"):
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "topicforge._ngdkern",
                ["src/topicforge/_ngdkern.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
