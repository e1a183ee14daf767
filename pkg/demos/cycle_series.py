"""Walk through the d_k pipeline on cycles, where every answer is known.

    python demos/cycle_series.py
"""
from dimerseries.entropy_series import entropy_series
from dimerseries.lattice import build_cycle
from dimerseries.matchings import count_matchings
from dimerseries.relations import virial_series

tables = [count_matchings(build_cycle(2 * n)) for n in range(10, 101)]
print("C_20 matchings:", tables[0].counts)

series = entropy_series(tables, r=2, kmax=6, min_sizes=4, max_sizes=8)
print(f"{'k':>2} {'fitted d_k':>12} {'sigma':>9} {'1/(k(k-1)2^k)':>14}")
for k, d, s in series.coefficients:
    print(f"{k:>2} {d:12.8f} {s:9.1e} {1 / (k * (k - 1) * 2 ** k):14.8f}")

# virial coefficients follow from d_k with no further fitting
for k, m in virial_series(series).coefficients:
    print(f"m_{k} = {m:.6f}")
