"""Joining two projections, and what happens at and past the cut time pi/2."""

# %%
import math

import numpy as np

from grassgeo import AlgebraShape, Element
from grassgeo.grassmann import GeodesicState, geodesic_eval
from grassgeo.matcore import expm_skew
from grassgeo.metricpath import direct_rotation, geodesic_join, second_minimizing_geodesic, shortcut_past_cut
from grassgeo.sampling import random_close_pair

# %% Close projections: the direct rotation is the unique short geodesic.
rng = np.random.default_rng(3)
P, Q, x0 = random_close_pair(rng, AlgebraShape.of(5, (4, "R")))
res = direct_rotation(P, Q)
e = expm_skew(res.x)
print(f"||P - Q|| = {(P.p - Q.p).norm():.4f}, ||x|| = {res.length:.4f} < pi/2,"
      f" residual {(e @ P.p @ e.H - Q.p).norm():.1e}, recovered generator error {(res.x - x0).norm():.1e}")

# %% Orthogonal lines in M2: a geodesic exists but is not unique.
sh = AlgebraShape.of(2)
e11, e22 = Element(sh, [np.diag([1.0, 0])]), Element(sh, [np.diag([0, 1.0])])
join = geodesic_join(e11, e22)
print(f"\njoin e11 -> e22: exists {join.exists}, unique {join.unique}, length {join.length / math.pi:.3f} pi")

# %% Rescale so the cut sits at t = 1; a second geodesic rotates the other way.
st = GeodesicState.from_elements(e11, Element(sh, [np.array([[0, 1.0], [1.0, 0]])])).with_speed(math.pi / 2)
other = second_minimizing_geodesic(st)
print("second geodesic ends at e22:", np.allclose(geodesic_eval(other, 1.0).p.blocks[0], e22.blocks[0]))

# %% Just past the cut the original geodesic stops minimizing.
for eps in (0.05, 0.1, 0.3):
    sc = shortcut_past_cut(st, eps)
    print(f"eps = {eps}: shortcut {sc.length / math.pi:.3f} pi  vs  gamma {sc.original_length / math.pi:.3f} pi")
