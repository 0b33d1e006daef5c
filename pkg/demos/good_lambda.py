"""Good-lambda inequality for dyadic martingales, on an example where it has content.

f = r_1 + ... + r_J (Rademacher functions). The square function is sqrt(J)
everywhere, so {M f > 2 lam, S f <= eps lam} is nonempty only when lam sits
between sqrt(J)/eps and the largest values of the walk.
"""

import numpy as np

from curvemax.dyadic_martingale import (DyadicFunction, cww_factor_B, cww_verify,
                                        martingale_product_identity, random_martingale)

J, eps = 20, 0.45
i = np.arange(2**J)
bits = (i[:, None] >> np.arange(J)[None, :]) & 1
f = DyadicFunction(1, J, (2 * bits - 1).sum(axis=1).astype(float))

for lam in (9.5, 9.95):
    rep = cww_verify(f, lam, eps, "B")
    print(f"lam = {lam}: |{{Mf > 2 lam, Sf <= eps lam}}| = {rep.lhs_measure:.3e}, "
          f"C(eps) |{{Mf > lam}}| = {cww_factor_B(eps) * rep.rhs_measure:.3e}, ok = {rep.passed}")

# exp(t (E_m g - E_n g)) normalised by prod_j E_j exp(t D_j g) averages to 1 on every depth-n cell
g = random_martingale(8, np.random.default_rng(0))
print("product identity on cell (2, 1):", martingale_product_identity(g, (2, 1), 6, 1.0))
