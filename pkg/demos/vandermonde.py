"""Even minus odd aggregation of P_(k) equals the Vandermonde product."""
import numpy as np

from hypersync.symgroup import check_factorization, enumerate_sym, even_odd_difference, power_sum_aggregate

rng = np.random.default_rng(0)
for k in (2, 3, 4):
    table = enumerate_sym(k + 1)
    x = rng.uniform(-1, 1, k + 1)
    diff, prod, ok = check_factorization(table, x)
    print(f"k = {k}: even - odd = {diff:+.12f}, product = {prod:+.12f}, agree = {ok}")

# with two entries equal the even and odd block families are the same multiset
x = np.array([0.3, -0.2, 0.3])
print("partially synchronous point (rounding level):", even_odd_difference(power_sum_aggregate, enumerate_sym(3), x))
