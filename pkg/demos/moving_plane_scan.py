"""
Locating the plane of symmetry
==============================

For a decaying positive field, move the plane ``x1 = lam`` down from large
values and watch the gap ``v(x) - v(x^lam)`` on the half above it.  The
smallest lam at which the gap is still nonnegative is the symmetry plane of
a radial profile.
"""
import numpy as np

from degenliouville import ProblemParams
from degenliouville import moving_plane as mp
from degenliouville.exact import BubbleParams, lifted_bubble_field

p = ProblemParams.critical(1, 1.5)
box = [(-5.0, 5.0), (-5.0, 5.0)]
for c in (0.0, 0.7, -0.4):
    L = lifted_bubble_field(p, BubbleParams(1.0, [c]))
    res = mp.critical_plane(L, 0, (-1.5, 2.0), 0.05, box=box)
    print(f"bubble centred at {c:+.2f}: plane at {res.lambda0:+.3f}, monotone above = {res.monotone}")

# an asymmetric profile still has a first plane where the gap stays
# nonnegative, but the field is not symmetric about it
def skew(P):
    x, y = P[..., 0], P[..., 1]
    return (np.exp(-(x - 0.2) ** 2 - y**2) + 0.5 * np.exp(-4 * (x - 1.0) ** 2 - y**2),)

res = mp.critical_plane(skew, 0, (-1.5, 2.5), 0.01, box=box)
print(f"two-bump profile: plane at {res.lambda0:+.3f}, "
      f"largest gap {np.max(mp.gap_samples(skew, res.lambda0, box=box).gaps):.3f}")
L = lifted_bubble_field(p, BubbleParams(1.0, [0.7]))
print(f"bubble at 0.70 for comparison: largest gap {np.max(mp.gap_samples(L, 0.7, box=box).gaps):.2e}")
