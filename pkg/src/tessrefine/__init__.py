"""Refinability checks for indicator and box-type splines on shift-invariant tessellations."""

__version__ = "0.1.0"

from .geometry import Facet2, Polygon, clip, superpose  # noqa: E402
from .lattices import LatticeSpec, make_lattice, obtuse_inner_product  # noqa: E402
from .tessellation import (ScaledCopy, Tessellation, TessellationFamily,  # noqa: E402
                           family_preset, preset)

__all__ = ["Facet2", "LatticeSpec", "Polygon", "ScaledCopy", "Tessellation", "TessellationFamily",
           "clip", "family_preset", "make_lattice", "obtuse_inner_product", "preset", "superpose",
           "__version__"]
