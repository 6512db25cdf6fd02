"""Pseudospectral laboratory for Schrodinger-Bopp-Podolsky peaks on a flat 3-torus.

Fields are ``ScalarField`` objects; ``ScalarField(array, length)`` and
``field.to_numpy()`` convert from and to ``n x n x n`` arrays indexed
``[ix, iy, iz]``.
"""

from ._sbpp import *  # noqa: F401,F403
from ._sbpp import __doc__  # noqa: F401

__version__ = "0.1.0"
