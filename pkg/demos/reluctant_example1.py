"""Example 1: a core branch of order 1 per node drives a y-separation of order 3.

Run with ``python3 demos/reluctant_example1.py [out_dir]``.
"""
import sys

from hypersync.experiments import run_example

out = sys.argv[1] if len(sys.argv) > 1 else None
result = run_example(1, out)
print(result.summary())

# y0 and y1 themselves grow linearly while their difference grows cubically,
# so the branch hugs the synchrony space {y0 = y1}
pos = result.log.side(1)
for i in range(0, len(pos), 100):
    lam = pos.lams[i]
    y0, gap = pos.column("y0")[i], pos.difference("y0", "y1")[i]
    print(f"lam = {lam:.2e}   y0 = {y0:+.3e}   y0 - y1 = {gap:+.3e}")
