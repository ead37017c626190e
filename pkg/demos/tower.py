"""Stacked augmentations raise the separation exponent 3 -> 5 -> 7."""
import sys

from hypersync.experiments import run_tower

layers = int(sys.argv[1]) if len(sys.argv) > 1 else 2
print(run_tower(layers, svg=False).summary())
