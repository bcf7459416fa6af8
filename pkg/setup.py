# sncov is pure Python, but numpy, scipy and pandas must come along with it,
# so setuptools is required.
import setuptools

with open("VERSION") as f:
    VERSION = f.read().strip()

name = "sncov"
description = "Sphericity tests for high-dimensional covariance matrices via self-normalized observations"
with open("README.md", encoding='utf-8') as f:
    long_description = f.read().strip()
# http://pypi.python.org/pypi?%3Aaction=list_classifiers
classifiers = ["Development Status :: 4 - Beta",
               "Intended Audience :: Science/Research",
               "License :: OSI Approved :: BSD License",
               "Operating System :: OS Independent",
               "Programming Language :: Python",
               "Programming Language :: Python :: 3",
               "Topic :: Scientific/Engineering :: Mathematics"]
license = "http://creativecommons.org/licenses/BSD/"
keywords = "sphericity test covariance high-dimensional self-normalization Marcenko-Pastur elliptical"

install_requires = ["numpy>=1.22", "scipy>=1.8", "pandas>=1.4"]
tests_require = ["hypothesis>=6.0"]

setuptools.setup(name=name,
                 version=VERSION,
                 description=description,
                 long_description=long_description,
                 long_description_content_type="text/markdown",
                 classifiers=classifiers,
                 license=license,
                 keywords=keywords,
                 packages=["sncov"],
                 package_data={"sncov": ["designs/*.txt"]},
                 python_requires=">=3.9",
                 install_requires=install_requires,
                 extras_require={"tests": tests_require},
                 entry_points={"console_scripts": ["sncov = sncov.cli:main"]},
                 )
