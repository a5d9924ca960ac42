"""
Bubbles and their Kelvin images
===============================

The critical bubble solves ``y u_yy + a u_y + u_xx + u^alpha = 0`` exactly.  We
check the pointwise residual on random points, lift to ``s = 2 sqrt(y)``, and
apply the Kelvin transform.  The image solves the same equation away from the
origin, and applying the transform twice gives back the original field.
"""
import numpy as np

from degenliouville import ProblemParams
from degenliouville.exact import BubbleParams, bubble_field, lifted_bubble_field, residual_001, residual_halfspace
from degenliouville.transforms import kelvin

p = ProblemParams.critical(1, 1.5)
print(f"n=1, a=1.5: homogeneous dimension {p.effective_dimension:g}, critical exponent {p.alpha:g}")

rng = np.random.default_rng(0)
F = bubble_field(p, BubbleParams(1.0, [0.3]))
P = np.column_stack([rng.uniform(-4, 4, 2000), rng.uniform(0, 4, 2000)])
r = residual_001(F, p, P)
print(f"bubble residual, max over 2000 points: {np.max(np.abs(r)):.2e}")

# lifted bubble and its inversion
L = lifted_bubble_field(p, BubbleParams(1.0, [0.3]))
K = kelvin(L, p)
d = rng.standard_normal((1000, 2))
Q = d / np.linalg.norm(d, axis=1, keepdims=True) * rng.uniform(0.2, 5.0, (1000, 1))
print(f"Kelvin image residual: {np.max(np.abs(residual_halfspace(K, p, Q))):.2e}")
print(f"involution defect:     {np.max(np.abs(kelvin(K, p)(Q)[0] - L(Q)[0])):.2e}")

# the image decays like |X|^(2-N) with coefficient u(0)
for R in (10.0, 100.0, 1000.0):
    X = np.array([[0.0, R]])
    print(f"  |X|={R:6.0f}  |X|^(N-2) K(X) = {K(X)[0][0] * R ** p.decay_order:.8f}")
print(f"  lifted bubble at the origin     = {L(np.zeros((1, 2)))[0][0]:.8f}")
