"""Rebuild the high-j degree certificates and print the proof log.

    python demos/kernel_listing.py [mm]
"""
import sys

from dimerseries.highj_kernel import KernelConfig, lemma_check, verify_eq28_numeric
from dimerseries.lattice import build_cycle
from dimerseries.matchings import count_matchings

mm = int(sys.argv[1]) if len(sys.argv) > 1 else 10
report = lemma_check(KernelConfig(mm=mm))
print(report.proof_log())

# the same degree bound, checked numerically on real counts
tables = [count_matchings(build_cycle(2 * n)) for n in range(10, 21)]
eq = verify_eq28_numeric(tables, h_max=2, k_max=4)
print("largest j^k coefficient that should vanish:", eq.max_flagged)
