"""Setup script for shubin-spectra"""

from setuptools import setup
from pathlib import Path

this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text(encoding='utf-8')

setup(
    name='shubin-spectra',
    version='0.1.0',
    description='Spectral analysis of Shubin operators and Gelfand-Shilov decay classes in the Hermite basis',
    long_description=long_description,
    long_description_content_type='text/markdown',
    author='twobeass',
    author_email='',
    packages=['shubin_spectra'],
    package_data={'shubin_spectra': ['jobs/*.json']},
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.9',
        'pandas>=1.5',
        'matplotlib>=3.5',
    ],
    entry_points={
        'console_scripts': [
            'shubin-spectra=shubin_spectra.cli:main',
        ],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    python_requires='>=3.9',
    keywords='shubin hermite spectral gelfand-shilov ultradifferentiable',
)
