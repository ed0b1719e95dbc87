# %% [markdown]
# # Convolved hexagon splines
#
# Each convolution of the hexagon indicator with itself gives a smoother
# spline, and the shifts keep summing to one. Smoothing does not fix
# refinability, though. The half-scale fit residual stays bounded away
# from zero as the grid is refined.

# %%
from tessrefine.splines import (hex_spline, partition_of_unity_error, spline_refinability_residual,
                                support_diameter)

h = 1 / 64

# %%
for k in (1, 2, 3):
    f = hex_spline(k, h)
    print(k, round(f.integral(), 5), round(support_diameter(f), 4),
          f"{partition_of_unity_error('hex', k, h):.1e}")

# %% [markdown]
# Relative refinement residual. The square splines are exact up to
# rasterization error. The hexagon residual does not shrink when h is
# halved.

# %%
for cell in ("square", "hex"):
    for k in (1, 2):
        r = [spline_refinability_residual(k, s, cell) for s in (h, h / 2)]
        print(cell, k, [round(x, 5) for x in r])
