"""Build an adversarial test function whose maximal Hilbert transform is large.

Each node w of a binary tree of depth mu owns a set E_w of the torus and a
frequency placed in the sector where the curve with parameter u_tau(w) sees
the symbol near its vertical value. The script builds the family, checks its
structural invariants and then measures ||sup_u |H^(u) f| ||_2 against ||f||_2.
"""

import sys

from curvemax.curve_model import CurveParams
from curvemax.experiments import kara_pipeline
from curvemax.karagulyan import lower_bound_experiment, verify_family
from curvemax.multiplier import MultiplierEvaluator

mu = int(sys.argv[1]) if len(sys.argv) > 1 else 3
n = 512
p = CurveParams(2.0, 1.0, 1.0)

sel, fam, f, pieces, tree = kara_pipeline(p, mu, n, C_circ=1.8816)
print(f"mu = {mu}: {len(pieces)} pieces on a {n} x {n} grid, K = {sel.K:.3g}")
print("parameters u_j:", ", ".join(f"{u:.3g}" for u in sel.u_list))

rep = verify_family(fam, f, pieces)
for k, v in rep.to_dict().items():
    print(f"  {k:22s} {v}")

print("\ntabulating the multiplier (a few seconds)...")
ev = MultiplierEvaluator(p)
lb = lower_bound_experiment(fam, f, pieces, ev)
print(f"||max_u |H f| || / ||f|| >= {lb.estimate:.4f}")
print(f"scaled multiplier errors: axis {lb.max_scaled_error_axis:.3f}, "
      f"vertical {lb.max_scaled_error_vertical:.3f}")
