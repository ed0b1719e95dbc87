# %% [markdown]
# # Half-scale hexagons do not nest
#
# A square splits exactly into four half-size squares. A hexagon does not
# split into half-size hexagons: six of the small cells straddle its
# boundary. This script measures that straddle directly, then measures
# what it costs in a least-squares fit.

# %%
import numpy as np

from tessrefine.projector import error_vs_level, project
from tessrefine.refinability import facet_union_test, obtuse_reflection_test
from tessrefine.tessellation import preset

hexes, squares = preset("hex"), preset("square")

# %% [markdown]
# ## Geometric tests
# The facet-union test asks whether every coarse edge is a union of fine
# edges. For the hexagon it fails, and it reports an uncovered segment and
# one straddling cell.

# %%
for name, t in (("square", squares), ("hex", hexes)):
    r = facet_union_test(t)
    print(name, r.verdict.value, r.details["straddling_cells"])

rep = facet_union_test(hexes)
print("uncovered segment", np.round(rep.witness["uncovered_segment"], 4))

# %% [markdown]
# Two adjacent hexagon edges meet at 120 degrees, so their outward normals
# have inner product 1/2. Reflecting a cell across one of those edges gives
# a cell that overlaps the other one.

# %%
ob = obtuse_reflection_test(hexes)
print(ob.verdict.value, round(ob.witness["normal_product"], 6))

# %% [markdown]
# ## Cost in L2
# Project the indicator of one hexagon onto the half-scale indicators. The
# interior cell gets coefficient 1 and the six boundary cells get 1/2. The
# squared residual comes out as 1.5 times the area of a small hexagon.

# %%
h = hexes.reference_cells()[0]
r = project(h, hexes.scaled(0.5))
core = np.array(r.basis.core)
print(np.round(np.sort(r.coefficients[core]), 6))
print("residual / small area:", r.squared_residual / (h.area / 4))

# %% [markdown]
# Error by level. Level 0 is exact. Every finer level has a positive error,
# while the square grid stays at zero.

# %%
for name, t in (("square", squares), ("hex", hexes)):
    print(name, [round(x.l2_error, 6) for x in error_vs_level(t, 3)])
