"""q-eigenvalues of the Dirichlet Laplacian: radial shooting, grid solvers,
spectra of disjoint unions and identity checks."""

from ._qspec import *  # noqa: F401,F403
from ._qspec import __version__  # noqa: F401
