"""Generation and validation of secure modulo zero-sum randomness.

A bundle of m shares X_1..X_m in F_q^c is modulo zero-sum randomness when
the shares sum to zero and any m-1 of them are jointly uniform.  Bundles come
from an ideal sampler, a ring of pairwise agreed keys, a secure-summation
oracle, or computational-basis measurement of a phase GHZ state.

Audits are exact: they enumerate a generator's full randomness and check the
two conditions as equalities of rational probabilities, never statistically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .fields import FieldSpec, FieldVector, vector_from_indices, all_vectors
from . import quantum

ENUMERATION_CAP = 2**20


class EnumerationOverflow(ValueError):
    """The exact enumeration would exceed the configured atom cap."""


@dataclass
class ZeroSumBundle:
    """Per-player shares X_1..X_m in F_q^c with provenance."""

    field: FieldSpec
    m: int
    c: int
    shares: tuple
    provenance: str
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.shares) != self.m:
            raise ValueError("wrong number of shares")
        for s in self.shares:
            if s.field != self.field or len(s) != self.c:
                raise ValueError("share shape mismatch")

    def share(self, player: int) -> FieldVector:
        """1-based player index, matching the protocol layer."""
        return self.shares[player - 1]

    def is_zero_sum(self) -> bool:
        acc = self.field.zero_vector(self.c)
        for s in self.shares:
            acc = acc + s
        return acc.is_zero()

    def require_zero_sum(self) -> "ZeroSumBundle":
        if not self.is_zero_sum():
            raise ValueError("shares do not sum to zero")
        return self

    def indices(self) -> tuple:
        return tuple(s.indices() for s in self.shares)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "q": self.field.order,
            "c": self.c,
            "shares": [s.to_json() for s in self.shares],
            "provenance": self.provenance,
            "seed": self.seed,
        }


def ideal_mzsr(field: FieldSpec, m: int, c: int, rng, seed=None) -> ZeroSumBundle:
    """Ideal functionality: X_1..X_{m-1} i.i.d. uniform, X_m the negated sum."""
    if m < 2:
        raise ValueError("need at least two players")
    shares = [field.random_vector(c, rng) for _ in range(m - 1)]
    last = field.zero_vector(c)
    for s in shares:
        last = last - s
    shares.append(last)
    return ZeroSumBundle(field, m, c, tuple(shares), "ideal", seed).require_zero_sum()


def ring_mzsr(keys: Sequence[FieldVector], seed=None) -> ZeroSumBundle:
    """Ring construction from pairwise agreed keys Z_1..Z_m: X_1 = Z_1 - Z_m
    and X_i = Z_i - Z_{i-1}; the telescoping sum is identically zero."""
    m = len(keys)
    if m < 2:
        raise ValueError("need at least two keys")
    field = keys[0].field
    c = len(keys[0])
    shares = [keys[0] - keys[m - 1]]
    for i in range(1, m):
        shares.append(keys[i] - keys[i - 1])
    return ZeroSumBundle(field, m, c, tuple(shares), "ring", seed).require_zero_sum()


def mzsr_from_summation(field: FieldSpec, m: int, c: int,
                        secure_sum: Callable[[list], FieldVector],
                        rng, seed=None) -> ZeroSumBundle:
    """Derive a bundle from a secure-summation oracle on fresh uniform inputs:
    X_1 = Y_1 - sum(Y), X_i = Y_i for i >= 2."""
    ys = [field.random_vector(c, rng) for _ in range(m)]
    total = secure_sum(ys)
    shares = [ys[0] - total] + ys[1:]
    return ZeroSumBundle(field, m, c, tuple(shares), "from-summation",
                         seed).require_zero_sum()


def quantum_mzsr(field: FieldSpec, m: int, rng, noise: Optional[quantum.NoiseModel] = None,
                 c: int = 1, seed=None) -> ZeroSumBundle:
    """Computational-basis outcomes of (possibly noisy) phase GHZ registers.

    Each of the c symbols comes from an independent GHZ copy.  With no noise
    the zero-sum condition holds with certainty; noisy bundles may violate it
    and the provenance records the noise kind.
    """
    reg = quantum.ghz_phase_state(field, m)
    if noise is not None:
        reg = quantum.apply_noise(reg, noise, rng)
    columns = []
    for _ in range(c):
        outcomes, _ = quantum.measure_computational(reg, rng)
        columns.append(outcomes)
    shares = tuple(
        vector_from_indices(field, [columns[k][i] for k in range(c)])
        for i in range(m))
    prov = "quantum" if noise is None or noise.kind == "none" else \
        f"quantum+{noise.kind}(eps={noise.eps})"
    bundle = ZeroSumBundle(field, m, c, shares, prov, seed)
    if noise is None or noise.kind == "none":
        bundle.require_zero_sum()
    return bundle


def broken_mzsr(field: FieldSpec, m: int, c: int, rng, copy_from: int = 1,
                copy_to: int = 2, rebalance: bool = True, seed=None) -> ZeroSumBundle:
    """Deliberately broken generator for negative tests: share copy_to is a
    copy of share copy_from.  With rebalance the last share restores the
    zero-sum condition (so only independence fails)."""
    shares = [field.random_vector(c, rng) for _ in range(m)]
    shares[copy_to - 1] = shares[copy_from - 1]
    if rebalance:
        acc = field.zero_vector(c)
        for s in shares[:-1]:
            acc = acc - s
        shares[-1] = acc
    return ZeroSumBundle(field, m, c, tuple(shares), "broken", seed)


# --- exact generator distributions ------------------------------------------

def _vec_tuple(vecs) -> tuple:
    return tuple(v.indices() for v in vecs)


def ideal_distribution(field: FieldSpec, m: int, c: int) -> list:
    """Exact bundle distribution of the ideal sampler: uniform over the
    q^{c(m-1)} zero-sum share tuples."""
    _check_enum(field.order ** (c * (m - 1)))
    atoms = []
    w = Fraction(1, field.order ** (c * (m - 1)))
    symbols = list(itertools.product(range(field.order), repeat=c))
    for heads in itertools.product(symbols, repeat=m - 1):
        last = [0] * c
        for h in heads:
            for k in range(c):
                last[k] = field.add_idx(last[k], h[k])
        atoms.append((heads + (tuple(field.neg_idx(x) for x in last),), w))
    return atoms


def ring_distribution(field: FieldSpec, m: int, c: int) -> list:
    """Bundle distribution of the ring construction under uniform i.i.d. keys."""
    _check_enum(field.order ** (c * m))
    atoms = []
    w = Fraction(1, field.order ** (c * m))
    symbols = list(itertools.product(range(field.order), repeat=c))
    for keys in itertools.product(symbols, repeat=m):
        shares = tuple(
            tuple(field.sub_idx(keys[i][k], keys[i - 1][k]) for k in range(c))
            for i in range(m))  # keys[-1] wraps to the last key, closing the ring
        atoms.append((shares, w))
    return atoms


def from_summation_distribution(field: FieldSpec, m: int, c: int) -> list:
    """Bundle distribution of the summation-derived generator under uniform
    independent inputs (the oracle output is the plain sum)."""
    _check_enum(field.order ** (c * m))
    atoms = []
    w = Fraction(1, field.order ** (c * m))
    symbols = list(itertools.product(range(field.order), repeat=c))
    for ys in itertools.product(symbols, repeat=m):
        total = [0] * c
        for y in ys:
            for k in range(c):
                total[k] = field.add_idx(total[k], y[k])
        first = tuple(field.sub_idx(ys[0][k], total[k]) for k in range(c))
        atoms.append(((first,) + ys[1:], w))
    return atoms


def quantum_distribution(field: FieldSpec, m: int, c: int) -> list:
    """Analytic computational-basis bundle distribution of c noiseless GHZ
    copies: the product of c uniform zero-sum symbol distributions."""
    reg = quantum.ghz_phase_state(field, m)
    probs = quantum.computational_distribution(reg)
    symbol_atoms = []
    for idx, p in enumerate(probs):
        if p > 1e-12:
            symbol_atoms.append((reg.index_to_outcomes(idx),
                                 Fraction(1, field.order ** (m - 1))))
    _check_enum(len(symbol_atoms) ** c)
    atoms = []
    for combo in itertools.product(symbol_atoms, repeat=c):
        shares = tuple(tuple(combo[k][0][i] for k in range(c)) for i in range(m))
        w = Fraction(1)
        for _, pw in combo:
            w *= pw
        atoms.append((shares, w))
    return atoms


def broken_distribution(field: FieldSpec, m: int, c: int, copy_from: int = 1,
                        copy_to: int = 2, rebalance: bool = True) -> list:
    _check_enum(field.order ** (c * m))
    atoms = []
    w = Fraction(1, field.order ** (c * m))
    for draws in itertools.product(all_vectors(field, c), repeat=m):
        shares = list(draws)
        shares[copy_to - 1] = shares[copy_from - 1]
        if rebalance:
            acc = field.zero_vector(c)
            for s in shares[:-1]:
                acc = acc - s
            shares[-1] = acc
        atoms.append((_vec_tuple(shares), w))
    return atoms


GENERATOR_DISTRIBUTIONS = {
    "ideal": ideal_distribution,
    "ring": ring_distribution,
    "from-summation": from_summation_distribution,
    "quantum": quantum_distribution,
    "broken": broken_distribution,
}


def _check_enum(n_atoms: int):
    if n_atoms > ENUMERATION_CAP:
        raise EnumerationOverflow(
            f"{n_atoms} atoms exceed the exact-enumeration cap {ENUMERATION_CAP}")


# --- audits -------------------------------------------------------------------

@dataclass
class BundleAudit:
    """Exact verdicts over a generator's full bundle distribution."""

    m: int
    q: int
    c: int
    zero_sum: bool
    independent: bool
    marginals: dict = dc_field(default_factory=dict)
    failures: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.zero_sum and self.independent

    def to_json(self) -> dict:
        return {
            "m": self.m, "q": self.q, "c": self.c,
            "zero_sum": self.zero_sum,
            "independent": self.independent,
            "passed": self.passed,
            "failures": self.failures,
            "mode": "exact",
        }


def audit_bundle_distribution(field: FieldSpec, m: int, c: int,
                              atoms: Iterable[tuple]) -> BundleAudit:
    """Check the modulo-zero and independence conditions exactly.

    atoms is an iterable of (share index tuples, Fraction weight) covering the
    generator's entire randomness.  Uniformity is checked as equality of
    rational probabilities, not statistically.
    """
    q = field.order
    atoms = list(atoms)
    total = sum(w for _, w in atoms)
    if total != 1:
        raise ValueError("atom weights must sum to 1")
    zero_sum = True
    failures = []
    for shares, w in atoms:
        if w == 0:
            continue
        for k in range(c):
            acc = 0
            for i in range(m):
                acc = field.add_idx(acc, shares[i][k])
            if acc != 0:
                zero_sum = False
                failures.append({"condition": "zero-sum", "shares": shares})
                break
        if not zero_sum:
            break

    independent = True
    expected = Fraction(1, q ** (c * (m - 1)))
    marginals = {}
    for leave_out in range(m):
        marg = {}
        for shares, w in atoms:
            key = tuple(shares[i] for i in range(m) if i != leave_out)
            marg[key] = marg.get(key, Fraction(0)) + w
        marginals[leave_out + 1] = marg
        if len(marg) != q ** (c * (m - 1)) or any(v != expected for v in marg.values()):
            independent = False
            failures.append({"condition": "independence",
                             "subset": f"all players except {leave_out + 1}"})
    return BundleAudit(m=m, q=q, c=c, zero_sum=zero_sum,
                       independent=independent, marginals=marginals,
                       failures=failures)


def audit_generator(name: str, field: FieldSpec, m: int, c: int) -> BundleAudit:
    """Audit one of the named generators by exhaustive enumeration."""
    if name not in GENERATOR_DISTRIBUTIONS:
        raise ValueError(f"unknown generator {name!r}; "
                         f"choose from {sorted(GENERATOR_DISTRIBUTIONS)}")
    atoms = GENERATOR_DISTRIBUTIONS[name](field, m, c)
    return audit_bundle_distribution(field, m, c, atoms)
