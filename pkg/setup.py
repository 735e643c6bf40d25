import re

from setuptools import find_namespace_packages, setup

TEST_REQUIREMENTS = ("pytest", "hypothesis")
PACKAGES = ["banded*", "covering*", "renorm*", "transfer*", "cmv*", "experiments*", "publisher*", "utils*"]


def _version():
    with open("experiments/__init__.py", "r", encoding="utf-8") as f:
        return re.search(r'^__version__ = "([^"]+)"', f.read(), re.M).group(1)


def _requirements():
    with open("requirements.txt", "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f]
    return [line for line in lines if line and not line.startswith("#") and line not in TEST_REQUIREMENTS]


setup(
    name="spectral-renorm",
    version=_version(),
    description="Renormalization transforms for Jacobi, CMV and banded operators, with transfer-operator oracles.",
    packages=find_namespace_packages(include=PACKAGES),
    py_modules=["renorm_app"],
    python_requires=">=3.9",
    install_requires=_requirements(),
    extras_require={"test": list(TEST_REQUIREMENTS)},
    entry_points={"console_scripts": ["spectral-renorm = renorm_app:main"]},
)
