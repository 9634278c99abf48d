"""Exact discrete-distribution machinery: joint tables, mutual information,
total-variation distance, and the hypergeometric posterior behind the
random-sampling confidence bound.

Rational (Fraction) arithmetic is the default so that identities that should
be exactly zero come out exactly zero; float mode exists for large
exploratory tables only.
"""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class TableError(ValueError):
    pass


class JointTable:
    """A joint probability table over named discrete variables.

    Outcomes are tuples (one entry per variable).  Probabilities are exact
    Fractions in rational mode or floats otherwise.
    """

    def __init__(self, names: Sequence[str], probs: dict, exact: bool = True):
        self.names = tuple(names)
        self.probs = dict(probs)
        self.exact = exact
        total = sum(self.probs.values())
        if exact:
            if total != 1:
                raise TableError(f"probabilities sum to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise TableError(f"probabilities sum to {total}, not 1")
        for k, v in self.probs.items():
            if len(k) != len(self.names):
                raise TableError("outcome arity does not match variable names")
            if v < 0:
                raise TableError("negative probability")

    @classmethod
    def from_atoms(cls, names: Sequence[str], atoms: Iterable[tuple],
                   exact: bool = True) -> "JointTable":
        """Aggregate (outcome, weight) atoms into a normalized table."""
        acc: dict = defaultdict(lambda: Fraction(0) if exact else 0.0)
        total = Fraction(0) if exact else 0.0
        for outcome, weight in atoms:
            acc[tuple(outcome)] += weight
            total += weight
        if total == 0:
            raise TableError("no probability mass")
        return cls(names, {k: v / total for k, v in acc.items() if v != 0}, exact)

    @classmethod
    def uniform_over(cls, names: Sequence[str], outcomes: Iterable[tuple]) -> "JointTable":
        outcomes = [tuple(o) for o in outcomes]
        w = Fraction(1, len(outcomes))
        return cls.from_atoms(names, ((o, w) for o in outcomes))

    def _idx(self, group: Sequence[str]) -> list:
        try:
            return [self.names.index(g) for g in group]
        except ValueError as e:
            raise TableError(f"unknown variable in {group}") from e

    def marginal(self, group: Sequence[str]) -> "JointTable":
        idx = self._idx(group)
        acc: dict = defaultdict(lambda: Fraction(0) if self.exact else 0.0)
        for outcome, p in self.probs.items():
            acc[tuple(outcome[i] for i in idx)] += p
        return JointTable(group, dict(acc), self.exact)

    def to_float(self) -> "JointTable":
        return JointTable(self.names, {k: float(v) for k, v in self.probs.items()},
                          exact=False)

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "exact": self.exact,
            "probs": [
                {"outcome": list(k),
                 "p": [v.numerator, v.denominator] if self.exact else v}
                for k, v in sorted(self.probs.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "JointTable":
        exact = data["exact"]
        probs = {}
        for row in data["probs"]:
            p = row["p"]
            probs[tuple(row["outcome"])] = Fraction(p[0], p[1]) if exact else p
        return cls(data["names"], probs, exact)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.names) + ["probability"])
            for outcome, p in sorted(self.probs.items()):
                writer.writerow([json.dumps(o) for o in outcome] + [str(p)])

    @classmethod
    def from_csv(cls, path, exact: bool = True) -> "JointTable":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            names = header[:-1]
            probs = {}
            for row in reader:
                outcome = tuple(json.loads(x) for x in row[:-1])
                probs[outcome] = Fraction(row[-1]) if exact else float(row[-1])
        return cls(names, probs, exact)


def _is_product_form(table: JointTable, group_a, group_b) -> bool:
    joint = table.marginal(list(group_a) + list(group_b)).probs
    pa = table.marginal(group_a).probs
    pb = table.marginal(group_b).probs
    zero = Fraction(0) if table.exact else 0.0
    for ka, va in pa.items():
        for kb, vb in pb.items():
            if joint.get(ka + kb, zero) != va * vb:
                return False
    return True


def mutual_information(table: JointTable, group_a: Sequence[str],
                       group_b: Sequence[str]) -> float:
    """I(A;B) in bits.  In rational mode a product-form joint returns an
    exact 0.0 with no tolerance involved."""
    if set(group_a) & set(group_b):
        raise TableError("groups must be disjoint")
    if table.exact and _is_product_form(table, group_a, group_b):
        return 0.0
    joint = table.marginal(list(group_a) + list(group_b))
    pa = table.marginal(group_a).probs
    pb = table.marginal(group_b).probs
    la = len(group_a)
    acc = 0.0
    for k, p in joint.probs.items():
        if p == 0:
            continue
        ratio = p / (pa[k[:la]] * pb[k[la:]])
        acc += float(p) * math.log2(float(ratio))
    return max(acc, 0.0)


def conditional_mutual_information(table: JointTable, group_a, group_b,
                                   given) -> float:
    """I(A;B|C) in bits, as a weighted sum over conditioning outcomes."""
    pc = table.marginal(given).probs
    joint = table.marginal(list(group_a) + list(group_b) + list(given))
    lc = len(given)
    acc = 0.0
    for c_outcome, p_c in pc.items():
        cond = {k[:-lc]: p / p_c for k, p in joint.probs.items()
                if k[-lc:] == c_outcome and p != 0}
        if not cond:
            continue
        sub = JointTable(list(group_a) + list(group_b), cond, table.exact)
        acc += float(p_c) * mutual_information(sub, group_a, group_b)
    return acc


@dataclass(frozen=True)
class TVResult:
    tv: float
    l1: float


def tv_distance(p: JointTable, q: JointTable) -> TVResult:
    """Total-variation distance (1/2 the l1 distance), with the raw l1 value."""
    if p.names != q.names:
        raise TableError("tables are over different variables")
    keys = set(p.probs) | set(q.probs)
    zero = Fraction(0) if (p.exact and q.exact) else 0.0
    l1 = sum(abs(p.probs.get(k, zero) - q.probs.get(k, zero)) for k in keys)
    return TVResult(tv=float(l1) / 2.0, l1=float(l1))


def hypergeometric_posterior(n: int, prior: Sequence, k: int):
    """Pr(remaining variable = 1 | at most k ones among n observed).

    n+1 exchangeable binary variables carry an unknown number of ones X with
    the given prior over {0,...,n+1}; n of them are inspected uniformly at
    random and Z ones are seen.  Joint masses follow the sampling identities
      Pr(Z=z, Y=0) = P_z (n-z+1)/(n+1),  Pr(Z=z, Y=1) = P_{z+1} (z+1)/(n+1).
    """
    prior = [Fraction(x) if not isinstance(x, Fraction) else x for x in prior]
    if len(prior) != n + 2:
        raise TableError(f"prior must have {n + 2} entries")
    if any(x < 0 for x in prior) or sum(prior) != 1:
        raise TableError("prior is not a probability vector")
    if not 0 <= k < n:
        raise TableError("need 0 <= k < n")
    num = sum(prior[z + 1] * Fraction(z + 1, n + 1) for z in range(k + 1))
    den = sum(prior[z] for z in range(k + 1)) + prior[k + 1] * Fraction(k + 1, n + 1)
    if den == 0:
        raise TableError("conditioning event has probability zero")
    return num / den


def two_point_prior(n: int, k: int, p) -> list:
    """The extremal prior family: mass 1-p at X=k and p at X=k+1."""
    p = Fraction(p) if not isinstance(p, Fraction) else p
    prior = [Fraction(0)] * (n + 2)
    prior[k] = 1 - p
    prior[k + 1] = p
    return prior
