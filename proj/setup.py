from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

# Same sources the CMake build compiles into the static library, plus the
# binding translation unit. Metadata lives in pyproject.toml.
ext = Pybind11Extension(
    "conceptguard._core",
    sorted(glob("src/*.cpp")) + ["python/bindings.cpp"],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
