"""Diagrams on 2n boundary points and how they multiply.

Run: python demos/01_diagram_algebra.py
"""

from mirrorcyl import bar_count, bar_pair, compose, enumerate_diagrams, identity, parse_diagram, to_text

# A diagram pairs the n north points (1+ .. n+) with the n south points (1- .. n-).
# ">" marks a through path, "^" a north bar and "v" a south bar.
e = identity(4)
print("identity on 4 strands:", to_text(e))

cap = bar_pair(4, 2, 3)
print("cap-cup on strands 2,3:", to_text(cap), "bars:", bar_count(cap))

# Stacking cap on top of itself closes a loop in the middle layer.
# Loops are removed and counted.
sq = compose(cap, cap)
print("cap * cap =", to_text(sq.diagram), "with", sq.loops, "loop")

# Bars never disappear under multiplication: bar counts only go up.
d = parse_diagram("[1+>2-, 2+^3+, 4+>4-, 1-v3-]")
for other in (e, cap, bar_pair(4, 3, 4)):
    prod = compose(d, other).diagram
    print(f"  {to_text(d)} * {to_text(other)} has {bar_count(prod)} bar(s)")

# Through paths that meet a cap below close into a new bar.
two = compose(bar_pair(4, 1, 2), bar_pair(4, 3, 4)).diagram
print("caps on 1,2 then 3,4:", to_text(two), "bars:", bar_count(two))

# There are (2n - 1)!! diagrams of width n.
for n in (2, 4, 6):
    print(f"width {n}: {sum(1 for _ in enumerate_diagrams(n))} diagrams")
