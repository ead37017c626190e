"""The pattern {y0 = y1} on the Example-1 network survives every admissible field
of degree 2 but is broken at degree 3, the order-2 bound k(k+1)/2.
"""
from hypersync import presets
from hypersync.admissible import is_robust_synchrony, synchrony_census
from hypersync.network import Partition

hn = presets.network("example1")
p = Partition.from_merges(hn, [["y0", "y1"]])
for degree in (1, 2, 3):
    v = is_robust_synchrony(hn, p, samples=32, degree=degree)
    print(f"degree {degree}: {'robust' if v.robust else 'broken'} (max violation {v.max_violation:.2e})")

print("\nfull census at the default degree:")
for v in synchrony_census(hn, samples=64):
    print(f"  {str(v.partition):24s} {'robust' if v.robust else '-'}")
