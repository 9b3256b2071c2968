"""From a row of mirrors to a diagram.

A street is one row of the cylinder.  Light entering from the north or south
bounces off "/" and "\\" mirrors and leaves somewhere on the boundary; the
resulting pairing is the street's diagram.

Run: python demos/02_street_tracing.py
"""

import numpy as np

from mirrorcyl import ModelParams, StreetConfig, compose, is_walled, sample_street, to_text, trace_street
from mirrorcyl.lattice import conditioned_law

print("empty street is the identity:", to_text(trace_street(StreetConfig.from_string("...."))))
# A lone mirror sends the light once around the cylinder and back out the
# other side, so it also traces to the identity.  Two mirrors can make a bar.
for row in ("/...", "/\\..", "./\\.", "\\../"):
    print(f"  {row:6} -> {to_text(trace_street(StreetConfig.from_string(row)))}")

# In the Manhattan model the orientation at (x, t) is fixed by parity; only
# presence is random.  Its diagrams are walled.
params = ModelParams(6, 0.3)
rng = np.random.default_rng(1)
prod = None
for t in range(1, 9):
    s = sample_street("manhattan", params, rng, t)
    d = trace_street(s)
    prod = d if prod is None else compose(prod, d).diagram
    print(f"street {t} ({s.direction}) {s.to_string()}  walled={is_walled(d)}  product walled={is_walled(prod)}")

# Conditioning on at most two mirrors leaves a small law X with a closed form.
law = conditioned_law("mirror", ModelParams(4, 0.1))
print(f"\nX for the mirror model at n=4, p=0.1 has {len(law)} atoms; the heaviest:")
for d, w in sorted(law, key=lambda a: -a[1])[:4]:
    print(f"  {w:.4f}  {to_text(d)}")
