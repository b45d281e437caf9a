"""Finite-dimensional block algebras with weighted traces.

Python face of the C++ core: build block algebras and their elements as
numpy arrays, form superoperators and trace adjoints, certify complete
positivity, take gauged orbit limits, and run the similarity-to-unitary
pipeline. All numerics happen in the compiled extension; this package
just re-exports it under a stable name.
"""

from _finvn import *  # noqa: F401,F403
from _finvn import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
