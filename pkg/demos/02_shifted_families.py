# %% [markdown]
# # Unions of shifted hexagonal grids
#
# A natural repair is to add shifted copies of the half-scale grid. This
# script shows that the repair fails: the residual stays positive, and a
# local certificate shows why.

# %%
import numpy as np

from tessrefine.projector import project
from tessrefine.refinability import (cells_overlapping, efficiency_test, lozenge,
                                     overlap_criterion_test, step_infeasibility_certificate)
from tessrefine.tessellation import family_preset

# %% [markdown]
# ## The lozenge
# With three shifted grids, a small rhombus next to the top vertex lies
# inside three fine cells at once. The coefficients on it are coupled,
# and that coupling is what breaks exactness.

# %%
ex2 = family_preset("example2-family")
for cell, member, frac in cells_overlapping(lozenge(), ex2.scaled(0.5)):
    print(member, np.round(cell.centroid, 4), round(frac, 6))

# %% [markdown]
# ## Residuals

# %%
for name in ("example2-family", "example3-family", "square-family"):
    fam = family_preset(name)
    r = project(fam.base.reference_cells()[0], fam.scaled(0.5), l1=False)
    print(name, round(r.squared_residual, 6))

# %% [markdown]
# ## Efficiency and overlap
# A family is efficient when no coarse edge segment is covered by more
# fine edges than it needs. The two-shift configuration is efficient. The
# three-shift one is not, and the test returns the segment as a witness.

# %%
for name in ("fig4a-family", "fig4b-family"):
    r = efficiency_test(family_preset(name))
    print(name, r.verdict.value, r.witness and r.witness["facet_count"])

ov = overlap_criterion_test(family_preset("example3-family"))
print(ov.verdict.value, round(ov.witness["alpha"], 6))

# %% [markdown]
# ## Step certificate
# Near a point where two fine edges meet on the top coarse edge, matching
# the indicator on both sides needs a jump of 1 across the edge. The local
# linear system forces a jump of 2, and its least-squares residual is
# positive.

# %%
cert = step_infeasibility_certificate(family_preset("example3-family"))
print("point", np.round(cert.point, 6))
print("required", cert.required_step, "implied", round(cert.implied_step, 6))
print("residual", round(cert.residual, 6), "crossing cells", cert.crossing_cells)
