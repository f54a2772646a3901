"""Multiscale reduction of the lattice potential KdV equation."""

try:
    from ._latmscale import *  # installed wheel layout
    from ._latmscale import __doc__ as _doc
except ImportError:  # in-tree CMake build: module sits next to the package
    from _latmscale import *
    from _latmscale import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
