"""Conjugate points along a geodesic of projective space.

A rank-one projection in M_n is a point of projective space of dimension
n - 1. We follow the unit geodesic that rotates e1 towards e2 and ask, at
every candidate time, how large the kernel of the exponential differential is.
"""

# %%
import math

import numpy as np

from grassgeo.conjugate import classify_all, projective_reference
from grassgeo.grassmann import geodesic_eval
from grassgeo.jacobi import dexp_matrix
from grassgeo.scenarios import projective_state

# %% The geodesic reaches the orthogonal line at t = pi/2 and returns at t = pi.
st = projective_state(4, "C")
for t in (0.0, math.pi / 4, math.pi / 2, math.pi):
    diag = np.real(np.diag(geodesic_eval(st, t).p.blocks[0]))
    print(f"t = {t / math.pi:.2f} pi   diagonal of gamma(t): {np.round(diag, 6)}")

# %% Candidate times are k pi / |s - s'| over pairs of speed eigenvalues; here {-1, 0, 1}.
for field in "CR":
    st = projective_state(4, field)
    print(f"\n{field}P^3")
    for rep in classify_all(st, 2 * math.pi):
        print(f"  T = {rep.time.T / math.pi:.2f} pi  order {rep.order}  (SVD oracle: {rep.oracle_nullity})")
    print("  reference:", [(row.label, row.order) for row in projective_reference(4, field)])

# %% The same information from the smallest singular values of the differential.
st = projective_state(4, "C")
for T in np.linspace(0.25, 2.0, 8) * math.pi:
    s = np.linalg.svd(dexp_matrix(st, T), compute_uv=False)
    print(f"T = {T / math.pi:.2f} pi   smallest singular values {np.round(np.sort(s)[:3], 8)}")
