import math
from fractions import Fraction

import pytest
import sympy

from dimerseries.formal import FormalPoly
from dimerseries.highj_kernel import (
    InsufficientSizes,
    KernelConfig,
    ResourceError,
    assemble_FF,
    degree_certificate,
    falling_factorial_poly,
    kernel_certificates,
    lemma_check,
    partition_product,
    partitions,
    planted_eq28_tables,
    verify_eq28_numeric,
)
from dimerseries.lattice import build_cycle
from dimerseries.matchings import count_matchings
from oracles import sympy_FF, sympy_certificate

j = FormalPoly.var("j")
rh = FormalPoly.var("rh")


def to_sympy(p: FormalPoly):
    out = sympy.Integer(0)
    for m, c in p.terms.items():
        t = sympy.Rational(c.numerator, c.denominator)
        for v, e in m:
            t *= sympy.Symbol(v) ** e
        out += t
    return out


def test_partitions():
    assert partitions(0) == [[]]
    assert len(partitions(4)) == 5
    assert len(partitions(10)) == 42
    for m in range(0, 16):
        assert len(partitions(m)) == int(sympy.functions.combinatorial.numbers.partition(m))
        assert all(sum(p) == m and p == sorted(p) for p in partitions(m))
    with pytest.raises(ResourceError):
        partitions(41)


def test_falling_factorial():
    assert falling_factorial_poly(1) == j
    assert falling_factorial_poly(3).evaluate({"j": 3}) == 6
    assert falling_factorial_poly(3).evaluate({"j": 2}) == 0
    for q in range(1, 11):
        f = falling_factorial_poly(q)
        assert f.degree("j") == q
        assert all(f.evaluate({"j": x}) == 0 for x in range(q))
        assert f.evaluate({"j": q + 2}) == math.factorial(q + 2) // 2


def test_partition_products():
    u2, u3 = FormalPoly.var("u2"), FormalPoly.var("u3")
    ch1, ch2 = FormalPoly.var("ch1"), FormalPoly.var("ch2")
    assert partition_product(1, "F") == u2
    assert partition_product(2, "F") == u3 + u2 ** 2 / 2
    assert partition_product(2, "E") == rh * ch2 + rh ** 2 * ch1 ** 2 / 2


def test_partition_product_is_exponential():
    mm = 7
    y = sympy.Symbol("y")
    g = sum(sympy.Symbol(f"u{s + 1}") * y ** s for s in range(1, mm + 1))
    ref = sympy.expand(sympy.series(sympy.exp(g), y, 0, mm + 1).removeO())
    for i in range(0, mm + 1):
        assert sympy.expand(ref.coeff(y, i) - to_sympy(partition_product(i, "F"))) == 0


def test_config_validation():
    with pytest.raises(ValueError):
        KernelConfig(mm=5, lL=6)
    with pytest.raises(ValueError):
        KernelConfig(jq=0)
    assert KernelConfig().thresholds == (20000, 30000)
    assert KernelConfig.from_dict(KernelConfig(aQ=Fraction(1, 3)).to_dict()) == KernelConfig(aQ=Fraction(1, 3))


def test_assemble_special_cases():
    cfg = KernelConfig(mm=6, lL=3)
    F = partition_product(3, "F", cfg)
    zero = {q: FormalPoly() for q in range(3, 7)}
    assert assemble_FF(3, cfg, ee=zero) == F
    ee = dict(zero)
    ee[3] = FormalPoly.var("e3")
    got = assemble_FF(3, cfg, F=FormalPoly(), ee=ee)
    assert got == FormalPoly.var("e3") * falling_factorial_poly(3) * FormalPoly.var("z", 3)
    assert assemble_FF(3, cfg).degree("z") <= 6


def test_degree_certificate_examples():
    ch1 = FormalPoly.var("ch1")
    assert degree_certificate(rh ** 2 * j ** 3 * ch1 ** 2, 2) == 3
    assert degree_certificate(rh * j ** 3, 2) == -1


@pytest.mark.parametrize("mode", ["listing", "formal"])
def test_full_FF_matches_sympy(mode):
    cfg = KernelConfig(mm=6, lL=3, u_mode=mode)
    for i in range(3, 7):
        ours = to_sympy(assemble_FF(i, cfg))
        assert sympy.expand(ours - sympy_FF(i, 6, 3, 0, mode)) == 0


def test_certificates_match_sympy_mm6():
    cfg = KernelConfig(mm=6, lL=3)
    for i, d in kernel_certificates(cfg).items():
        assert d == sympy_certificate(sympy_FF(i, 6, 3), 2)


def test_lemma_thresholds():
    cfg = KernelConfig(mm=6, lL=3)
    assert lemma_check(KernelConfig(mm=6, lL=3, thresholds=(math.inf, math.inf))).violations == []
    everything = lemma_check(KernelConfig(mm=6, lL=3, thresholds=(-1, math.inf)))
    assert everything.sq2 == set(everything.certificates.values())
    pairs = {(v.i, v.k) for v in everything.violations}
    assert pairs == {(i, k) for i in range(3, 7) for k in range(3, i)}
    rep = lemma_check(cfg)
    assert rep.passed and "Sq2 violation count: 0" in rep.proof_log()
    with pytest.raises(ValueError):
        lemma_check(cfg, i_range=[2])


def test_report_json_round_trip():
    from dimerseries.highj_kernel import LemmaReport
    rep = lemma_check(KernelConfig(mm=5, lL=3, thresholds=(-1, math.inf)))
    back = LemmaReport.from_dict(rep.to_dict())
    assert back.certificates == rep.certificates and back.violations == rep.violations
    assert "wwrhjq5:=" in rep.proof_log()


# -------------------------------------------------------------- j-degree check


def cycle_tables(ns):
    return [count_matchings(build_cycle(2 * n)) for n in ns]


def test_eq28_cycles_exact():
    rep = verify_eq28_numeric(cycle_tables(range(10, 21)), 2, 4)
    assert rep.exact and rep.h0_method == "exact-geometric"
    assert rep.max_flagged == 0
    assert set(rep.flagged) == {(0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 4)}


def test_eq28_planted_model():
    slices = {1: [Fraction(1, 3), Fraction(-2, 5), Fraction(1, 7)],
              2: [Fraction(1), Fraction(1, 2), Fraction(-1, 3), Fraction(2, 9)]}
    rep = verify_eq28_numeric(planted_eq28_tables(3, slices, list(range(10, 21)), 10), 2, 4)
    assert rep.max_flagged < 1e-9


def test_eq28_detects_high_degree():
    slices = {1: [0, 0, 0, Fraction(1, 5)]}
    rep = verify_eq28_numeric(planted_eq28_tables(3, slices, list(range(10, 21)), 10), 2, 4)
    assert rep.flagged[(1, 3)] == pytest.approx(0.2)


def test_eq28_mp_route():
    import mpmath
    tabs = [(t.n, [mpmath.mpf(c) for c in t.counts]) for t in cycle_tables(range(10, 21))]
    rep = verify_eq28_numeric(tabs, 2, 4)
    assert not rep.exact and rep.max_flagged < 1e-40


def test_eq28_needs_sizes():
    with pytest.raises(InsufficientSizes):
        verify_eq28_numeric(cycle_tables([10, 11, 12]), 2, 4)
