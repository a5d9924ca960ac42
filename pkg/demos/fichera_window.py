"""
Boundary ratio and the admissible exponent window
=================================================

On the model operator written in flattened coordinates the boundary ratio is
the constant ``a - 1``.  It fixes the range of exponents for which local
estimates close; the upper end always exceeds one once ``a > 1/2``.
"""
import numpy as np

from degenliouville.fichera import boundary_samples, exponent_window, fichera_ratio, model_operator, window_upper

for a in (0.75, 1.0, 1.5, 2.0, 3.0, 5.0):
    op = model_operator(a)
    g = fichera_ratio(op, boundary_samples(op, 500))
    rep = exponent_window(op)
    print(f"a={a:4.2f}  g in [{g.min():+.4f}, {g.max():+.4f}]  window upper {rep.window[1]:.4f}"
          f"  closed form {window_upper(a):.4f}")

a = np.linspace(0.51, 10, 8)
print("upper end over a:", np.round([window_upper(x) for x in a], 3))
