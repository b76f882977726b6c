from __future__ import absolute_import
from setuptools import find_packages
from setuptools import setup


setup(
    name='gaussperm',
    version='0.1.0',
    packages=find_packages(exclude=['tests']),
    include_package_data=True,
    install_requires=[
        'click>=7.0',
        'numpy>=1.17',
        'six>=1.14.0',
    ],
    extras_require={
        'test': [
            'flake8>=3.7.9',
            'pytest>=6.0',
        ],
    },
    entry_points={
        'console_scripts': [
            'gaussperm=gaussperm.cli:cli'
        ]
    },
)
