import itertools
from fractions import Fraction

import numpy as np
import pytest

from modsum.attacks import (AttackSpec, real_ideal_tv, run_attack, secrecy_audit,
                            summation_identities, wilson_interval)
from modsum.fields import FieldSpec, LinearMap, all_vectors, vector_from_indices
from modsum.mzsr import EnumerationOverflow
from modsum.protocols import HomomorphicSpec

GF2 = FieldSpec(2)


@pytest.mark.parametrize("p,ell,c", [
    (2, 1, 2), (2, 1, 3), (2, 2, 2), (2, 2, 3),
])
def test_modification_attack_matches_closed_form(p, ell, c):
    q = p**ell
    spec = AttackSpec("modification", {"p": p, "ell": ell, "c": c, "m": 3})
    result = run_attack(spec, mode="exact")
    assert result.exact == Fraction(q - 1, q**c - 1)


@pytest.mark.parametrize("e,d", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)])
def test_anon_disagree_matches_closed_form(e, d):
    spec = AttackSpec("anon-disagree", {"p": 2, "ell": 1, "e": e, "d": d, "m": 3})
    assert run_attack(spec).exact == Fraction(1, 2**e)


@pytest.mark.parametrize("e,d", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_anon_mismatch_matches_closed_form(e, d):
    spec = AttackSpec("anon-mismatch", {"p": 2, "ell": 1, "e": e, "d": d, "m": 3})
    assert run_attack(spec).exact == Fraction(1, 2**e)


@pytest.mark.parametrize("e,d", [(1, 1), (2, 1), (1, 2)])
def test_anon_collusion_matches_closed_form(e, d):
    spec = AttackSpec("anon-collusion", {"p": 2, "ell": 1, "e": e, "d": d, "m": 3})
    assert run_attack(spec).exact == Fraction(1, 2**e)


def test_anon_attacks_over_gf4():
    spec = AttackSpec("anon-disagree", {"p": 2, "ell": 2, "e": 1, "d": 1, "m": 3})
    assert run_attack(spec).exact == Fraction(1, 4)


def test_rushing_always_succeeds():
    spec = AttackSpec("rushing", {"p": 2, "ell": 1, "e": 2, "d": 1, "m": 3})
    assert run_attack(spec).exact == Fraction(1)


def test_monte_carlo_interval_contains_exact():
    spec = AttackSpec("modification", {"p": 2, "ell": 1, "c": 2, "m": 3})
    result = run_attack(spec, mode="monte-carlo", trials=4000, seed=11)
    assert result.exact == Fraction(1, 3)
    lo, hi = result.ci95
    assert lo <= float(result.exact) <= hi
    assert result.successes <= result.trials


def test_monte_carlo_coverage_meta():
    # the 95% interval should contain the exact value in >= 95% of repeated
    # experiments; fully deterministic given the seeds.  Wilson coverage
    # oscillates with the trial count, so use one where the exact binomial
    # coverage at p = 1/2 is above the nominal level (95.6% at 270 trials).
    spec = AttackSpec("anon-disagree", {"p": 2, "ell": 1, "e": 1, "d": 1, "m": 3})
    exact = float(run_attack(spec).exact)
    covered = 0
    for seed in range(100):
        r = run_attack(spec, mode="monte-carlo", trials=270, seed=seed)
        lo, hi = r.ci95
        covered += lo <= exact <= hi
    assert covered >= 95


def test_wilson_interval_sane():
    lo, hi = wilson_interval(50, 100)
    assert 0.4 < lo < 0.5 < hi < 0.6
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi < 0.05


def test_unknown_attack_rejected():
    with pytest.raises(ValueError):
        run_attack(AttackSpec("nope", {}))


def test_protocol1_secrecy_all_small_coalitions():
    # every colluding set of size m-2 learns nothing about any honest input
    for j in (1, 2, 3):
        for other in (1, 2, 3):
            if other == j:
                continue
            mi = secrecy_audit("secure-sum", [other], GF2, 3, 1, secret_owner=j)
            assert mi == 0.0


def test_secrecy_audit_symmetric_across_equivalent_coalitions():
    vals = [secrecy_audit("secure-sum", [k], GF2, 3, 1, secret_owner=1)
            for k in (2, 3)]
    assert vals[0] == vals[1] == 0.0
    vals4 = [secrecy_audit("secure-sum", list(t), GF2, 4, 1, secret_owner=1)
             for t in itertools.combinations((2, 3, 4), 2)]
    assert all(v == vals4[0] == 0.0 for v in vals4)


def test_broken_bundle_leaks():
    # a coalition holding a duplicated share reads the masked input directly
    mi = secrecy_audit("secure-sum", [2], GF2, 3, 1, secret_owner=1,
                       generator="broken")
    assert mi == 1.0
    # same duplication, but the duplicate lands on the colluder directly
    mi = secrecy_audit("secure-sum", [3], GF2, 3, 1, secret_owner=1,
                       generator="broken",
                       generator_params={"copy_to": 3, "rebalance": False})
    assert mi == 1.0


def test_basic_ss_secrecy_before_reveal_round():
    # players 2..m-1 before the share-reveal round know nothing about Y
    mi = secrecy_audit("basic-ss", [2], GF2, 3, 1, truncate_round=1)
    assert mi == 0.0


def test_homomorphic_secrecy():
    alphas = tuple(vector_from_indices(GF2, [1]) for _ in range(3))
    spec = HomomorphicSpec(GF2, 1, alphas, LinearMap.identity(GF2, 1))
    mi = secrecy_audit("homomorphic", [3], GF2, 3, 1, secret_owner=1, hspec=spec)
    assert mi == 0.0


def test_summation_identities_zero():
    for m in (3, 4):
        values = summation_identities(GF2, m, 1)
        assert len(values) == 3
        assert all(v == 0.0 for v in values.values())


def test_composition_full_view_secrecy():
    mi = secrecy_audit("from-summation", [3, 4], GF2, 4, 1, secret_owner=2)
    assert mi == 0.0


def test_real_ideal_equivalence():
    def hspec(c, fmap):
        alphas = tuple(vector_from_indices(GF2, [1] * c) for _ in range(3))
        return HomomorphicSpec(GF2, c, alphas, fmap)

    spec = hspec(1, LinearMap.identity(GF2, 1))
    for inputs in itertools.product(all_vectors(GF2, 1), repeat=3):
        for team in ([1], [3], [1, 2], [2, 3]):
            assert real_ideal_tv(spec, list(inputs), team).tv == 0.0

    spec = hspec(2, LinearMap.coordinate_swap(GF2, 2))
    inputs = [vector_from_indices(GF2, [1, 0]), vector_from_indices(GF2, [0, 1]),
              vector_from_indices(GF2, [1, 1])]
    for team in ([2], [1, 3]):
        assert real_ideal_tv(spec, inputs, team).tv == 0.0


def test_enumeration_overflow_raises():
    spec = AttackSpec("modification", {"p": 2, "ell": 4, "c": 4, "m": 3})
    with pytest.raises(EnumerationOverflow):
        run_attack(spec, mode="exact")
