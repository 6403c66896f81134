"""A finite shadow of an operator that is injective but not surjective.

L + R - 2 acts on real skew N x N matrices, with L and R multiplication by the
midpoint grid |x_i| of [-1, 1]. No |x_i| reaches 1, so every discretization
is injective, yet the smallest singular value is exactly 2/N and the
limiting operator has no bounded inverse.
"""

# %%
from grassgeo.oracle import discretized_epi_demo

for N in (8, 16, 32, 64):
    ms, null = discretized_epi_demo(N)
    print(f"N = {N:3d}   min singular value {ms:.6f}   2/N = {2 / N:.6f}   nullity {null}")
