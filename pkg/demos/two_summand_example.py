"""A geodesic in M2 + M2 whose two summands rotate at different speeds.

The speed is the swap matrix in the first summand and alpha times the swap
in the second. Candidate conjugate times come in four families: k pi / 2,
k pi / (1 + alpha), k pi / (1 - alpha) and k pi / (2 alpha). Only some of them
actually carry a kernel.
"""

# %%
import math

from grassgeo.conjugate import classify_all
from grassgeo.scenarios import pocos_state


def families(T, alpha):
    names = []
    for name, d in (("pi/2", 2.0), ("1+a", 1 + alpha), ("1-a", 1 - alpha), ("2a", 2 * alpha)):
        k = T * d / math.pi
        if abs(k - round(k)) < 1e-8:
            names.append(name)
    return ",".join(names)


# %%
for alpha in (0.4, 1 / 3):
    print(f"\nalpha = {alpha:.4g}")
    for rep in classify_all(pocos_state(alpha), 3 * math.pi):
        print(f"  T = {rep.time.T / math.pi:7.4f} pi  [{families(rep.time.T, alpha):>10}]  "
              f"{rep.classification.value:<14} order {rep.order}")

# %% The 2a family is conjugate: the second summand is a projective line travelled
# at speed alpha, so it has its own first conjugate point at pi / (2 alpha).
rep = [r for r in classify_all(pocos_state(0.4), 3 * math.pi) if abs(r.time.T - 1.25 * math.pi) < 1e-9][0]
w = rep.kernel.vectors()[0].x
print("\nkernel at 5pi/4, first summand:\n", w.blocks[0].round(6), "\nsecond summand:\n", w.blocks[1].round(6))
