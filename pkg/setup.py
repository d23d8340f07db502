import setuptools
from pathlib import Path


scripts = ["bin/hexperc_runner.py"]

with open("README.md", "r") as fh:
    long_description = fh.read()

version = {}
exec(Path("hexperc/__init__.py").read_text(), version)

setuptools.setup(
    name="hexperc-py",
    version=version["__version__"],
    description="Monte Carlo experiments for critical site percolation on the triangular lattice.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    scripts=scripts,
    install_requires=["numpy", "scipy", "pandas", "plotly", "yamale>=3.0", "pyyaml"],
    extras_require={"test": ["pytest", "hypothesis"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
)
