import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dimerseries.geometry import (
    GeomDensities,
    automorphism_count,
    count_embeddings,
    count_labeled_maps,
    format_table,
    geom_densities,
    geom_density,
    pattern_graphs,
)
from dimerseries.lattice import (
    Graph,
    build_blowup_cycle,
    build_cycle,
    build_honeycomb_torus,
    build_hypercubic_torus,
    build_prism_torus,
)
from oracles import automorphisms, labeled_subgraph_maps

PATS = {p.id.split("_")[0]: p for p in pattern_graphs()}


def quiet(f, *a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return f(*a)


def test_pattern_shapes():
    g1, g2, g3, g4 = (PATS[k].graph for k in ("G1", "G2", "G3", "G4"))
    assert (g1.num_vertices, g1.num_edges) == (4, 4)
    assert sorted(g3.degrees(), reverse=True) == [3, 3, 2, 2, 2]
    assert (g4.num_vertices, g4.num_edges) == (6, 7)
    assert (g2.num_vertices, g2.num_edges) == (6, 6)


def test_automorphism_counts():
    assert [p.automorphism_count for p in pattern_graphs()] == [8, 12, 12, 4]
    for p in pattern_graphs():
        assert automorphism_count(p) == automorphisms(p.graph.edges, p.graph.num_vertices)


def test_embedding_examples():
    assert count_embeddings(build_cycle(4), PATS["G1"]) == 1
    assert count_embeddings(build_honeycomb_torus(4, 4), PATS["G1"]) == 0
    assert count_embeddings(build_hypercubic_torus([6, 6]), PATS["G1"]) == 36


def test_density_examples():
    assert geom_density(build_hypercubic_torus([6, 6]), PATS["G1"]) == 2
    assert geom_density(build_prism_torus(4, 6), PATS["G1"]) == Fraction(5, 2)
    assert geom_density(build_honeycomb_torus(4, 4), PATS["G2"]) == 1


def test_honeycomb_3x3_six_cycles_include_wraps():
    # every 3x3 honeycomb torus also has six-cycles running around the torus
    g = quiet(build_honeycomb_torus, 3, 3)
    assert g.girth() == 6
    assert geom_density(g, PATS["G1"]) == 0
    gd = geom_densities(g)
    assert gd.density("G2") == 2
    assert any("G2" in w for w in gd.warnings)


@pytest.mark.parametrize("g,pid", [
    (lambda: quiet(build_hypercubic_torus, [4, 4]), "G1"),
    (lambda: quiet(build_hypercubic_torus, [4, 4]), "G4"),
    (lambda: build_prism_torus(4, 4), "G2"),
    (lambda: build_blowup_cycle(6), "G3"),
    (lambda: quiet(build_honeycomb_torus, 3, 3), "G2"),
    (lambda: build_cycle(6), "G2"),
])
def test_labeled_counts_match_enumeration(g, pid):
    g = g()
    p = PATS[pid]
    brute = labeled_subgraph_maps(g.edges, g.num_vertices, p.graph.edges, p.graph.num_vertices)
    assert count_labeled_maps(g, p) == brute
    assert count_embeddings(g, p) * p.automorphism_count == brute


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_relabel_invariance(seed):
    rng = random.Random(seed)
    g = build_prism_torus(4, 8)
    perm = list(range(g.num_vertices))
    rng.shuffle(perm)
    h = g.relabel(perm)
    for p in pattern_graphs():
        assert geom_density(h, p) == geom_density(g, p)


@pytest.mark.parametrize("dims", [[5, 6], [6, 6], [7, 8], [5, 10], [8, 8]])
def test_square_four_cycle_density(dims):
    assert geom_density(build_hypercubic_torus(dims), PATS["G1"]) == 2


@pytest.mark.parametrize("L", [6, 8, 10, 20])
def test_prism_c4_density(L):
    assert geom_density(build_prism_torus(4, L), PATS["G1"]) == Fraction(5, 2)


def test_blowup_density():
    for L in (6, 8, 12):
        assert geom_density(build_blowup_cycle(L), PATS["G1"]) == 5


def test_exactness_flags():
    assert all(e.exact for e in geom_densities(build_hypercubic_torus([8, 8])).entries)
    flags = {e.pattern[:2]: e.exact for e in geom_densities(build_hypercubic_torus([5, 6])).entries}
    assert flags["G1"] and not flags["G2"]
    assert not any(e.exact for e in geom_densities(Graph(4, ((0, 1), (1, 2), (2, 3), (3, 0)))).entries)


def test_json_and_table():
    gd = geom_densities(build_prism_torus(4, 8), "prism4")
    back = GeomDensities.from_dict(gd.to_dict())
    assert back == gd and back.vector()["G1"] == Fraction(5, 2)
    text = format_table([gd, geom_densities(build_hypercubic_torus([8, 8]))])
    head = text.splitlines()[0].split()
    assert head == ["lattice", "G1", "G2", "G3", "G4"]
    assert "5/2" in text
