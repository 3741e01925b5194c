"""Gaussian-state entanglement frustration toolkit.

Thin Python layer over the compiled core: state construction from unitaries
and squeezing spectra, bipartition purity measures, and the multistart
minimizers for the frustration objectives.
"""

try:
    from ._mmes import *  # noqa: F401,F403  (installed package layout)
    from ._mmes import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension on sys.path, not in package
    from _mmes import *  # noqa: F401,F403
    from _mmes import __version__  # noqa: F401
