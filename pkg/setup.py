import os

from setuptools import find_packages, setup

setup(
    name="passive-target-tracker",
    version="0.1.0",
    description="Passive target tracking with an unknown transmitter using particle belief propagation",
    long_description=open("README.md", encoding="utf-8").read()
    if os.path.exists("README.md")
    else "",
    long_description_content_type="text/markdown",
    package_dir={"": "src"},
    packages=find_packages(where="src", exclude=["*.tests", "*.tests.*"]),
    py_modules=["main"],
    install_requires=[
        "numpy>=2.3.2",
        "scipy>=1.16.1",
        "pandas>=2.3.2",
        "pydantic>=2.11.7",
        "pydantic-settings>=2.10.1",
        "python-dotenv>=1.1.1",
        "structlog>=25.4.0",
    ],
    python_requires=">=3.11",
    entry_points={
        "console_scripts": [
            "passive-track=main:main",
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
        "Topic :: Scientific/Engineering",
    ],
)
