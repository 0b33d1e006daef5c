"""Lower estimates for the maximal operator as the number of directions grows.

For N = 2, 4, ..., 32 lacunary parameters the adversarial family gives a ratio
that keeps climbing, roughly linearly in sqrt(log N), while a random
band-limited function stays flat. Takes about half a minute.
"""

from curvemax.experiments import ExperimentConfig, growth_fit, run_growth

cfg = ExperimentConfig.from_dict({"growth": {"N_list": [2, 4, 8, 16, 32], "C_circ": 1.8816}})
rows = run_growth(cfg)
print("   N   adversarial   random")
for r in rows:
    print(f"{r.N:4d}   {r.estimate:10.4f}   {r.baseline:7.4f}")
fit = growth_fit(rows)
print(f"slope vs sqrt(log N): {fit['slope']:.3f}, correlation {fit['correlation']:.4f}")
