"""Jacobi fields from matrix functions of ad v, checked against a family of geodesics."""

# %%
import math

import numpy as np

from grassgeo import AlgebraShape, oracle
from grassgeo.grassmann import curvature
from grassgeo.jacobi import jacobi_field
from grassgeo.sampling import random_tangent, random_unit_state

rng = np.random.default_rng(1)
st = random_unit_state(rng, AlgebraShape.of(4, (3, "R")))
X, Y = random_tangent(rng, st.P), random_tangent(rng, st.P)

# %% Closed form versus the derivative of a one-parameter family of geodesics.
for t in (0.5, 1.0, 2.0, math.pi):
    mu = jacobi_field(st, X, Y, t)
    err = oracle.fd_variation_check(st, X, Y, t, h=1e-4)
    print(f"t = {t:.3f}   |mu| = {mu.norm():.6f}   relative finite-difference gap {err / mu.norm():.2e}")

# %% The Jacobi equation, read off in the frame carried by the geodesic.
h, t = 1e-3, 1.3


def pulled(s):
    u = st.exp_tv(s)
    return u.H @ jacobi_field(st, X, Y, s).x @ u


d2 = (pulled(t - h) - 2.0 * pulled(t) + pulled(t + h)) * (1 / h**2)
rhs = curvature(st.P, pulled(t), st.V.x, st.V.x)
print(f"\n|D^2 mu - R(mu, gamma') gamma'| = {(d2 - rhs).norm():.2e}  (|D^2 mu| = {d2.norm():.3f})")
