import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from modsum.analysis import (JointTable, TableError, conditional_mutual_information,
                             hypergeometric_posterior, mutual_information,
                             tv_distance, two_point_prior)


def uniform_bits(n):
    w = Fraction(1, 2**n)
    return {bits: w for bits in itertools.product((0, 1), repeat=n)}


def test_independent_bits_zero_mi():
    table = JointTable(("a", "b"), uniform_bits(2))
    assert mutual_information(table, ("a",), ("b",)) == 0.0


def test_correlated_bits_one_bit():
    table = JointTable(("a", "b"), {(0, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)})
    assert mutual_information(table, ("a",), ("b",)) == pytest.approx(1.0)


def test_projection_of_pair_is_one_bit():
    # x uniform on two bits, y = first coordinate
    probs = {}
    for x0, x1 in itertools.product((0, 1), repeat=2):
        probs[((x0, x1), x0)] = Fraction(1, 4)
    table = JointTable(("x", "y"), probs)
    assert mutual_information(table, ("x",), ("y",)) == pytest.approx(1.0)


def test_exact_zero_has_no_tolerance():
    table = JointTable(("a", "b"), uniform_bits(2))
    assert mutual_information(table, ("a",), ("b",)) == 0.0
    # a slightly perturbed float table is not exactly independent
    probs = {k: float(v) for k, v in uniform_bits(2).items()}
    probs[(0, 0)] += 1e-6
    probs[(1, 1)] -= 1e-6
    noisy = JointTable(("a", "b"), probs, exact=False)
    assert mutual_information(noisy, ("a",), ("b",)) > 0.0


def test_chain_rule():
    # random-ish exact table over three bits
    weights = [1, 2, 3, 1, 4, 2, 2, 1]
    total = sum(weights)
    probs = {bits: Fraction(w, total) for bits, w in
             zip(itertools.product((0, 1), repeat=3), weights)}
    t = JointTable(("a", "b", "c"), probs)
    lhs = mutual_information(t, ("a",), ("b", "c"))
    rhs = (mutual_information(t, ("a",), ("b",))
           + conditional_mutual_information(t, ("a",), ("c",), ("b",)))
    assert lhs == pytest.approx(rhs, abs=1e-12)


@given(st.lists(st.integers(1, 9), min_size=8, max_size=8),
       st.lists(st.integers(0, 3), min_size=4, max_size=4))
@settings(max_examples=50, deadline=None)
def test_data_processing_never_increases_mi(weights, func):
    # applying a deterministic function to one side cannot increase MI
    total = sum(weights)
    atoms = []
    for (a, b), w in zip(itertools.product(range(2), range(4)), weights):
        atoms.append((((a,), (b,)), Fraction(w, total)))
    t = JointTable.from_atoms(("a", "b"), atoms)
    mapped = [(((a[0],), (func[b[0]],)), p) for (a, b), p in t.probs.items()]
    t2 = JointTable.from_atoms(("a", "fb"), mapped)
    assert mutual_information(t2, ("a",), ("fb",)) <= \
        mutual_information(t, ("a",), ("b",)) + 1e-9


def test_tv_distance_basics():
    p = JointTable(("x",), {(0,): Fraction(1)})
    q = JointTable(("x",), {(1,): Fraction(1)})
    r = tv_distance(p, q)
    assert r.l1 == 2.0 and r.tv == 1.0
    u = JointTable(("x",), {(0,): Fraction(1, 2), (1,): Fraction(1, 2)})
    assert tv_distance(u, p).l1 == pytest.approx(1.0)
    assert tv_distance(p, p).tv == 0.0


def test_tv_triangle_inequality():
    import random
    rnd = random.Random(7)
    for _ in range(30):
        tables = []
        for _ in range(3):
            ws = [rnd.randint(1, 10) for _ in range(4)]
            tot = sum(ws)
            tables.append(JointTable(
                ("x",), {(i,): Fraction(w, tot) for i, w in enumerate(ws)}))
        p, q, r = tables
        assert tv_distance(p, q).tv <= \
            tv_distance(p, r).tv + tv_distance(r, q).tv + 1e-12


def test_table_validation():
    with pytest.raises(TableError):
        JointTable(("a",), {(0,): Fraction(1, 2)})
    with pytest.raises(TableError):
        JointTable(("a",), {(0, 1): Fraction(1)})
    with pytest.raises(TableError):
        mutual_information(JointTable(("a", "b"), uniform_bits(2)),
                           ("a",), ("a",))
    with pytest.raises(TableError):
        tv_distance(JointTable(("a",), {(0,): Fraction(1)}),
                    JointTable(("b",), {(0,): Fraction(1)}))


def test_table_roundtrip(tmp_path):
    table = JointTable(("a", "b"), uniform_bits(2))
    back = JointTable.from_json(table.to_json())
    assert back.probs == table.probs and back.names == table.names
    path = tmp_path / "table.csv"
    table.to_csv(path)
    back = JointTable.from_csv(path)
    assert back.probs == table.probs


def test_hypergeometric_posterior_point_priors():
    n = 10
    # no ones anywhere: posterior 0
    prior = [Fraction(0)] * (n + 2)
    prior[0] = Fraction(1)
    assert hypergeometric_posterior(n, prior, k=2) == 0
    # all ones: conditioning event Z <= k is impossible
    prior = [Fraction(0)] * (n + 2)
    prior[n + 1] = Fraction(1)
    with pytest.raises(TableError):
        hypergeometric_posterior(n, prior, k=2)


def test_hypergeometric_posterior_two_point_family():
    # at the extremal mixing weight the posterior hits the closed-form bound
    n, k = 10, 1
    alpha = Fraction(2, 5)
    pstar = (1 - alpha) * (n + 1) / (n - k)
    val = hypergeometric_posterior(n, two_point_prior(n, k, pstar), k)
    bound = Fraction(k, 1) / (alpha * (n + 1)) + (1 - alpha) / (alpha * (n - k))
    assert val == bound


def test_invalid_prior_rejected():
    with pytest.raises(TableError):
        hypergeometric_posterior(5, [Fraction(1, 2)] * 3, 1)
    with pytest.raises(TableError):
        hypergeometric_posterior(5, [Fraction(-1)] + [Fraction(2)] + [Fraction(0)] * 5, 1)
