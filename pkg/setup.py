#!/usr/bin/env python

from setuptools import setup


def readme():
    with open('README.rst') as f:
        contents = f.read()
    return contents

setup(
    name='oversquash',
    version='1.0',
    license='MIT',
    description=('Sensitivity bounds, spectral connectivity and rewiring '
                 'for over-squashing in message-passing networks'),
    long_description=readme(),
    package_dir={
        'oversquash': 'oversquash',
        'oversquash.graph': 'oversquash/graph',
        'oversquash.spectral': 'oversquash/spectral',
        'oversquash.sensitivity': 'oversquash/sensitivity',
        'oversquash.rewiring': 'oversquash/rewiring',
        'oversquash.experiments': 'oversquash/experiments'
    },
    packages=['oversquash', 'oversquash.graph', 'oversquash.spectral',
              'oversquash.sensitivity', 'oversquash.rewiring',
              'oversquash.experiments'],
    scripts=['scripts/oversquash', 'scripts/transfer_sweep.py'],
    keywords='python graph neural networks oversquashing rewiring',
    install_requires=[
        'numpy',
        'scipy',
        'networkx',
    ]
)
