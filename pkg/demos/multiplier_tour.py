"""A walk around the symbol m(xi) of the Hilbert transform along t -> (t, c t^b).

Run with `python demos/multiplier_tour.py`. Prints values on the axes, checks the
anisotropic homogeneity and shows the square-root Hoelder behaviour near the xi_1 axis.
"""

import math

from curvemax.curve_model import CurveParams
from curvemax.multiplier import hoelder_verify, m_axis, m_point, rho_constant

p = CurveParams(2.0, 1.0, 1.0)

print("curve: b = 2, c+ = c- = 1")
print(f"  horizontal axis  m = {m_axis(p, 'horizontal', 1.0):.6f}")
print(f"  vertical axis    m = {m_axis(p, 'vertical_up'):.6f}   (rho = {rho_constant(p):.6f})")

# m is invariant under (xi1, xi2) -> (lam xi1, lam^b xi2)
xi = (0.7, -1.3)
for lam in (0.25, 1.0, 8.0):
    v = m_point(p, (lam * xi[0], lam**2 * xi[1]))
    print(f"  lam = {lam:5}: m = {v.real:+.10f} {v.imag:+.10f}i")

# close to the xi_1 axis the symbol moves like sqrt(xi_2 / xi_1^2)
rep = hoelder_verify(p, [10.0**-k for k in range(1, 7)])
print("\neta        deviation   2 sqrt(pi eta)")
for eta, d in zip(rep.eta_grid, rep.deviations_xi2_axis):
    print(f"{eta:8.0e}   {d:.3e}   {2 * math.sqrt(math.pi * eta):.3e}")
print(f"fitted exponents: {rep.fitted_exponent_xi2_axis:.3f} (xi_2 axis), "
      f"{rep.fitted_exponent_xi1_axis:.3f} (xi_1 axis)")
print(f"Hoelder constant estimate C = {rep.C_circ_estimate:.4f}")
