from setuptools import setup
from setuptools import find_packages

with open('requirements.txt') as f:
    required = f.read().splitlines()

setup(name='sparsecert',
      version="0.1.0",
      description='Compression based generalization bounds for adversarially robust linear and ReLU classifiers',
      install_requires=required,
      extras_require={"test": ["pytest>=6.0", "hypothesis>=6.0"]},
      entry_points={"console_scripts": ["sparsecert=sparsecert.cli:main"]},
      include_package_data=True,
      zip_safe=False,
      python_requires=">=3.8",
      packages=find_packages(exclude=["tests"]))
