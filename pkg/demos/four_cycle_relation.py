"""Does d_4 move linearly with the 4-cycle density at r = 4?

Three 4-regular bipartite families with different 4-cycle densities are
counted, extrapolated and fitted; each family is then predicted from the
other two. Takes about three minutes.

    python demos/four_cycle_relation.py
"""
import time
from fractions import Fraction

from dimerseries.entropy_series import entropy_series
from dimerseries.geometry import geom_densities
from dimerseries.lattice import build_blowup_cycle, build_hypercubic_torus, build_prism_torus
from dimerseries.matchings import count_matchings
from dimerseries.relations import Observation, fit_relation, slope_test

families = {
    "square": ([build_hypercubic_torus([L, 6]) for L in range(6, 49, 2)], (0.0, 0.4)),
    "prism4": ([build_prism_torus(4, L) for L in range(6, 121, 2)], (0.0, 0.3)),
    "blowup": ([build_blowup_cycle(L) for L in range(6, 241, 2)], (0.0, 0.3)),
}

obs = {k: [] for k in (2, 3, 4)}
for name, (graphs, window) in families.items():
    t0 = time.time()
    # densities are read off a mid-sized member, where wrap-arounds are long
    geo = geom_densities(graphs[len(graphs) // 2], name).vector()
    s = entropy_series([count_matchings(g) for g in graphs], 4, 8, p_window=window,
                       min_sizes=4, max_sizes=10)
    print(f"{name:7s} G1={str(geo['G1']):4s} d2={s.dk(2):.7f} d3={s.dk(3):.7f} "
          f"d4={s.dk(4):.6f}+-{s.sigma(4):.1e}  ({time.time() - t0:.0f}s)")
    for k in obs:
        obs[k].append(Observation(name, 4, geo, s.dk(k), s.sigma(k)))

for k in (2, 3):
    st = slope_test(obs[k])
    print(f"d{k} vs G1: slope {st['slope']:+.1e} +- {st['slope_sigma']:.1e}")

model = fit_relation(4, obs[4])
print(f"d4 = {model.coefficients[0]:.3e} + {model.coefficients[1]:.3e} G1"
      f"   (exact slope 1/512 = {1 / 512:.3e})")
for row in model.loo:
    print(f"  leave out {row['family']:7s} predicted {row['predicted']:.6f} "
          f"measured {row['measured']:.6f} pull {row['pull']:+.2f}")
