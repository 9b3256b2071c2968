"""Exact hitting-time CDFs for narrow cylinders.

The running product of street diagrams is a Markov chain on diagrams.  For
small n the whole distribution can be propagated, giving P[V <= i] exactly.

Run: python demos/03_exact_cdf.py
"""

from fractions import Fraction

from mirrorcyl import ModelParams, g_param, hitting_cdf, w_exact_cdf

params = ModelParams(4, 0.1)
for model in ("mirror", "manhattan"):
    v = hitting_cdf(model, params, conditioned=False, i_max=400)
    w = hitting_cdf(model, params, conditioned=True, i_max=400)
    print(f"{model:9}  P[V<=100]={v[99]:.4f}  P[V<=400]={v[399]:.4f}   P[W<=20]={w[19]:.4f}")

# The conditioned chain climbs one bar at a time with geometric waits, so its
# CDF is also a convolution of geometric laws.
a = hitting_cdf("mirror", params, True, 60)
b = w_exact_cdf("mirror", params, 60)
print("largest gap between the two exact routes:", abs(a - b).max())
print("bar-increment probabilities g_k:", [round(g_param("mirror", params, k), 4) for k in range(2)])

# Fraction inputs keep the arithmetic exact.
exact = hitting_cdf("mirror", ModelParams(2, Fraction(1)), True, 4)
print("n=2, p=1, conditioned:", [str(x) for x in exact])
