"""Negating F keeps every steady state but flips stability in the y-directions."""
import numpy as np

from hypersync import presets
from hypersync.bifurcation import SweepConfig, reassess, sweep_branch

aug, f, _, _ = presets.example_fields(1)
F = presets.response("example1.F", aug, "y")
branch = sweep_branch(f, SweepConfig(-0.03, 0.03, 13, presets.P5), tuple(aug.node_ids))
flipped = reassess(f.with_response("y", F.negated()), branch)
for lam, a, b in zip(branch.lams, branch.max_real, flipped.max_real):
    print(f"lam = {lam:+.4f}   max Re with F = {a:+.3f}   with -F = {b:+.3f}")
