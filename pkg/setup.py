from pathlib import Path

from setuptools import setup

setup(
    name='asphalt-integrable',
    use_scm_version={
        'version_scheme': 'post-release',
        'local_scheme': 'dirty-tag'
    },
    description='Integrable curve flow verification and simulation component for the Asphalt '
                'framework',
    long_description=Path(__file__).with_name('README.rst').read_text('utf-8'),
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10'
    ],
    license='Apache License 2.0',
    zip_safe=False,
    setup_requires=[
        'setuptools_scm >= 1.7.0'
    ],
    packages=[
        'asphalt.integrable',
        'asphalt.integrable.diffpoly',
        'asphalt.integrable.operators'
    ],
    python_requires='>= 3.8',
    install_requires=[
        'asphalt ~= 4.0',
        'asphalt-serialization[cbor] ~= 6.0',
        'typeguard ~= 2.13',
        'numpy >= 1.17',
        'sympy >= 1.7',
        'click >= 7.0'
    ],
    extras_require={
        'testing': [
            'pytest',
            'pytest-cov',
            'pytest-asyncio >= 0.10.0'
        ]
    },
    entry_points={
        'console_scripts': [
            'integrable = asphalt.integrable.cli:main'
        ],
        'asphalt.components': [
            'integrable = asphalt.integrable.component:IntegrableComponent'
        ]
    }
)
