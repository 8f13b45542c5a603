from setuptools import setup, find_packages

classifiers = [
    "Programming Language :: Python :: 3",
    "Intended Audience :: Science/Research",
    "License :: OSI Approved :: MIT License",
    "Topic :: Scientific/Engineering :: Mathematics",
    "Topic :: Utilities",
]

with open("README.md", "r") as fp:
    README = fp.read()

setup(name="gsbm-lab",
      version="0.1.0",
      packages=find_packages(exclude=["tests", "examples", "examples.*"]),
      description="low-degree hardness bounds for generalized stochastic block models",
      long_description=README,
      long_description_content_type="text/markdown",
      license="MIT",
      python_requires=">=3.8",
      install_requires=["numpy>=1.20", "scipy>=1.7"],
      extras_require={"test": ["pytest"]},
      entry_points={"console_scripts": ["gsbm-lab=gsbm_lab.cli.handler:main"]},
      classifiers=classifiers)
