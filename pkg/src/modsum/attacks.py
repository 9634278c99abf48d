"""Adversary strategies and secrecy audits.

Exact mode enumerates the full randomness of a protocol run (bundle, inputs,
adversary tape) and counts the success event as a rational number; Monte
Carlo mode estimates the same event with a Wilson 95% interval.  Secrecy
audits build the exact joint distribution of (secret, coalition view) and
evaluate the mutual information in bits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import mzsr, protocols
from .analysis import JointTable, mutual_information, tv_distance
from .channel import AdversaryModel, extract_view
from .fields import ExtFieldSpec, FieldElement, FieldSpec, FieldVector, all_vectors, vector_from_indices
from .mzsr import EnumerationOverflow, ZeroSumBundle

EXACT_ATOM_CAP = 2**24


@dataclass(frozen=True)
class AttackSpec:
    name: str
    params: dict = dc_field(default_factory=dict)


@dataclass
class AttackResult:
    name: str
    params: dict
    mode: str
    exact: Optional[Fraction] = None
    estimate: Optional[float] = None
    ci95: Optional[tuple] = None
    trials: int = 0
    successes: int = 0
    seed: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "attack": self.name,
            "params": {k: v for k, v in self.params.items()
                       if isinstance(v, (int, float, str, bool))},
            "mode": self.mode,
            "exact": None if self.exact is None else
                     {"num": self.exact.numerator, "den": self.exact.denominator,
                      "value": float(self.exact)},
            "estimate": self.estimate,
            "ci95": list(self.ci95) if self.ci95 else None,
            "trials": self.trials,
            "successes": self.successes,
            "seed": self.seed,
        }


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _bundle_from_indices(field: FieldSpec, m: int, c: int, idx) -> ZeroSumBundle:
    shares = tuple(vector_from_indices(field, row) for row in idx)
    return ZeroSumBundle(field, m, c, shares, "enumerated")


# --- cheater-detectable sharing: modification attack ---------------------------

def _modification_success(ext: ExtFieldSpec, x1: FieldElement,
                          offset: FieldElement) -> bool:
    """The colluders' offset succeeds when offset/X_1 is a nonzero base-field
    scalar, i.e. the receiver is steered to some A^{-1} Y with A in F_q\\{1}.
    The A = 0 member of that set drives the revealed-share sum to zero, which
    breaks the reconstruction without being classified as cheating."""
    ratio = offset / x1
    return ext.in_base_subfield(ratio) and not ratio.is_zero()


def _modification_exact(spec: AttackSpec) -> Fraction:
    field = _field_of(spec.params)
    c = spec.params.get("c", 2)
    qp = field.order**c
    if (qp - 1) ** 2 > EXACT_ATOM_CAP:
        raise EnumerationOverflow("offset x share enumeration too large")
    ext = ExtFieldSpec(field, c)
    per_offset = []
    for d_idx in range(1, qp):
        offset = ext.element(d_idx)
        hits = sum(
            _modification_success(ext, ext.element(x1), offset)
            for x1 in range(1, qp))
        per_offset.append(Fraction(hits, qp - 1))
    # the success probability is offset-independent; any disagreement would
    # mean the enumeration itself is wrong
    if len(set(per_offset)) != 1:
        raise AssertionError("modification success varies with the offset")
    return per_offset[0]


def _modification_mc(spec: AttackSpec, trials: int, rng) -> int:
    field = _field_of(spec.params)
    c = spec.params.get("c", 2)
    m = spec.params.get("m", 3)
    ext = ExtFieldSpec(field, c)
    successes = 0
    nonzero_secrets = [field.element(i) for i in range(1, field.order)]
    for _ in range(trials):
        # condition on a nonzero dealer share, as the closed form does
        while True:
            bundle = mzsr.ideal_mzsr(field, m, c, rng)
            if not ext.lift(bundle.share(1)).is_zero():
                break
        secret = nonzero_secrets[int(rng.integers(len(nonzero_secrets)))]
        offset = ext.element(int(rng.integers(1, ext.order)))
        adv = AdversaryModel(frozenset(range(2, m)), "modification",
                            {"total_offset": offset})
        res = protocols.secret_share_cheater_detect(secret, ext, bundle, adv)
        wrong_accept = res.outcome == "accept" and res.value != secret
        broken = res.outcome == "fail" and not res.z_zero
        if wrong_accept or broken:
            successes += 1
    return successes


# --- anonymous authentication attacks ------------------------------------------

def _auth_setup(spec: AttackSpec):
    field = _field_of(spec.params)
    e = spec.params.get("e", 1)
    d = spec.params.get("d", 1)
    m = spec.params.get("m", 3)
    c = 2 * e + d - 1
    project = vector_from_indices(field, [1] * d)
    return field, e, d, m, c, project


def _enumerate_bundles(field, m, c):
    for atoms in mzsr.ideal_distribution(field, m, c):
        yield _bundle_from_indices(field, m, c, atoms[0]), atoms[1]


def _anon_disagree_exact(spec: AttackSpec) -> Fraction:
    field, e, d, m, c, project = _auth_setup(spec)
    bad = spec.params.get("player", 2)
    hit = Fraction(0)
    for bundle, w in _enumerate_bundles(field, m, c):
        mac = protocols.derive_mac_params(bundle, e, d)
        for vote in all_vectors(field, e):
            res = protocols.anon_auth_basic(
                mac, [project] * m, [i + 1 != bad for i in range(m)],
                forced_votes={bad: vote})
            if res.accepted:
                hit += w * Fraction(1, field.order**e)
    return hit


def _anon_disagree_mc(spec: AttackSpec, trials: int, rng) -> int:
    field, e, d, m, c, project = _auth_setup(spec)
    bad = spec.params.get("player", 2)
    successes = 0
    for _ in range(trials):
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        mac = protocols.derive_mac_params(bundle, e, d)
        res = protocols.anon_auth_basic(
            mac, [project] * m, [i + 1 != bad for i in range(m)], rng=rng)
        successes += res.accepted
    return successes


def _anon_mismatch_exact(spec: AttackSpec) -> Fraction:
    field, e, d, m, c, project = _auth_setup(spec)
    bad = spec.params.get("player", 2)
    wrong = project + vector_from_indices(field, [1] + [0] * (d - 1))
    recognized = [wrong if i + 1 == bad else project for i in range(m)]
    hit = Fraction(0)
    for bundle, w in _enumerate_bundles(field, m, c):
        mac = protocols.derive_mac_params(bundle, e, d)
        res = protocols.anon_auth_basic(mac, recognized, [True] * m)
        if res.accepted:
            hit += w
    return hit


def _anon_mismatch_mc(spec: AttackSpec, trials: int, rng) -> int:
    field, e, d, m, c, project = _auth_setup(spec)
    bad = spec.params.get("player", 2)
    wrong = project + vector_from_indices(field, [1] + [0] * (d - 1))
    recognized = [wrong if i + 1 == bad else project for i in range(m)]
    successes = 0
    for _ in range(trials):
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        mac = protocols.derive_mac_params(bundle, e, d)
        successes += protocols.anon_auth_basic(mac, recognized, [True] * m).accepted
    return successes


def _anon_collusion_case(spec: AttackSpec):
    field, e, d, m, c, project = _auth_setup(spec)
    first_bad = spec.params.get("first_corrupted", m)
    wrong = project + vector_from_indices(field, [1] + [0] * (d - 1))
    # honest players 2..first_bad-1; at least one recognizes a wrong version
    recognized = [project] + [wrong] * (first_bad - 2) + [project] * (m - first_bad + 1)
    adv = AdversaryModel(frozenset(range(first_bad, m + 1)),
                        "mismatched-recognition", {"target_info": project})
    return field, e, d, m, c, recognized, adv


def _anon_collusion_exact(spec: AttackSpec) -> Fraction:
    field, e, d, m, c, recognized, adv = _anon_collusion_case(spec)
    hit = Fraction(0)
    for bundle, w in _enumerate_bundles(field, m, c):
        mac = protocols.derive_mac_params(bundle, e, d)
        res = protocols.anon_auth_secure(mac, recognized, [True] * m, adversary=adv)
        if res.accepted:
            hit += w
    return hit


def _anon_collusion_mc(spec: AttackSpec, trials: int, rng) -> int:
    field, e, d, m, c, recognized, adv = _anon_collusion_case(spec)
    successes = 0
    for _ in range(trials):
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        mac = protocols.derive_mac_params(bundle, e, d)
        successes += protocols.anon_auth_secure(
            mac, recognized, [True] * m, adversary=adv).accepted
    return successes


def _rushing_exact(spec: AttackSpec) -> Fraction:
    field, e, d, m, c, project = _auth_setup(spec)
    rusher = spec.params.get("player", m)
    wrong = project + vector_from_indices(field, [1] + [0] * (d - 1))
    recognized = [wrong if i + 1 == rusher else project for i in range(m)]
    adv = AdversaryModel(frozenset({rusher}), "rushing")
    hit = Fraction(0)
    for bundle, w in _enumerate_bundles(field, m, c):
        mac = protocols.derive_mac_params(bundle, e, d)
        res = protocols.anon_auth_basic(mac, recognized, [True] * m, adversary=adv)
        if res.accepted:
            hit += w
    return hit


def _rushing_mc(spec: AttackSpec, trials: int, rng) -> int:
    field, e, d, m, c, project = _auth_setup(spec)
    rusher = spec.params.get("player", m)
    wrong = project + vector_from_indices(field, [1] + [0] * (d - 1))
    recognized = [wrong if i + 1 == rusher else project for i in range(m)]
    adv = AdversaryModel(frozenset({rusher}), "rushing")
    successes = 0
    for _ in range(trials):
        bundle = mzsr.ideal_mzsr(field, m, c, rng)
        mac = protocols.derive_mac_params(bundle, e, d)
        successes += protocols.anon_auth_basic(
            mac, recognized, [True] * m, adversary=adv).accepted
    return successes


_ATTACKS = {
    "modification": (_modification_exact, _modification_mc),
    "anon-disagree": (_anon_disagree_exact, _anon_disagree_mc),
    "anon-mismatch": (_anon_mismatch_exact, _anon_mismatch_mc),
    "anon-collusion": (_anon_collusion_exact, _anon_collusion_mc),
    "rushing": (_rushing_exact, _rushing_mc),
}


def _field_of(params: dict) -> FieldSpec:
    return FieldSpec(params.get("p", 2), params.get("ell", 1))


def run_attack(spec: AttackSpec, mode: str = "exact", trials: int = 100000,
               seed: int = 0) -> AttackResult:
    """Evaluate an attack's success probability.

    Exact mode fully enumerates the randomness; Monte Carlo estimates it and
    still attaches the exact value when the enumeration is affordable, so the
    two can be cross-checked.
    """
    if spec.name not in _ATTACKS:
        raise ValueError(f"unknown attack {spec.name!r}; "
                         f"choose from {sorted(_ATTACKS)}")
    exact_fn, mc_fn = _ATTACKS[spec.name]
    if mode == "exact":
        exact = exact_fn(spec)
        return AttackResult(spec.name, spec.params, mode, exact=exact,
                            estimate=float(exact))
    if mode != "monte-carlo":
        raise ValueError("mode must be 'exact' or 'monte-carlo'")
    rng = np.random.default_rng(seed)
    successes = mc_fn(spec, trials, rng)
    estimate = successes / trials
    result = AttackResult(spec.name, spec.params, mode, estimate=estimate,
                          ci95=wilson_interval(successes, trials),
                          trials=trials, successes=successes, seed=seed)
    try:
        result.exact = exact_fn(spec)
    except EnumerationOverflow:
        pass
    return result


# --- exact secrecy audits -------------------------------------------------------

def _uniform_inputs(field, m, c):
    w = Fraction(1, field.order ** (m * c))
    for combo in itertools.product(all_vectors(field, c), repeat=m):
        yield list(combo), w


def secrecy_audit(protocol: str, colluders: Sequence[int], field: FieldSpec,
                  m: int, c: int = 1, secret_owner: Optional[int] = None,
                  generator: str = "ideal", generator_params: Optional[dict] = None,
                  hspec: Optional[protocols.HomomorphicSpec] = None,
                  truncate_round: Optional[int] = None) -> float:
    """Exact I(secret; coalition view) in bits under uniform independent
    inputs, enumerated over the full (bundle, input) randomness.

    The view is everything the coalition holds: all broadcasts (optionally
    truncated after a round) plus the coalition's private tapes.
    """
    colluders = sorted(set(colluders))
    if not colluders:
        raise ValueError("coalition must be nonempty")
    bundle_atoms = mzsr.GENERATOR_DISTRIBUTIONS[generator](
        field, m, c, **(generator_params or {}))
    n_atoms = len(bundle_atoms) * field.order ** (m * c)
    if n_atoms > EXACT_ATOM_CAP:
        raise EnumerationOverflow(f"{n_atoms} atoms exceed the exact cap")

    atoms = []
    if protocol == "secure-sum" or protocol == "homomorphic":
        if secret_owner is None:
            secret_owner = next(i for i in range(1, m + 1) if i not in colluders)
        for idx, bw in bundle_atoms:
            bundle = _bundle_from_indices(field, m, c, idx)
            for inputs, iw in _uniform_inputs(field, m, c):
                if protocol == "secure-sum":
                    res = protocols.secure_modulo_sum(inputs, bundle)
                else:
                    res = protocols.homomorphic_compute(hspec, inputs, bundle)
                view = _view_key(res.transcript, colluders, truncate_round)
                secret = inputs[secret_owner - 1].indices()
                atoms.append(((secret, view), bw * iw))
    elif protocol == "basic-ss":
        w = Fraction(1, field.order**c)
        for idx, bw in bundle_atoms:
            bundle = _bundle_from_indices(field, m, c, idx)
            for secret_vec in all_vectors(field, c):
                res = protocols.secret_share_basic(secret_vec, bundle)
                view = _view_key(res.transcript, colluders, truncate_round)
                atoms.append(((secret_vec.indices(), view), bw * w))
    elif protocol == "from-summation":
        # full composition: derive a bundle by running the summation protocol
        # on fresh uniform inputs over an inner bundle; the coalition sees the
        # whole inner transcript plus its own derived shares
        if secret_owner is None:
            secret_owner = next(i for i in range(1, m + 1) if i not in colluders)
        for idx, bw in bundle_atoms:
            inner = _bundle_from_indices(field, m, c, idx)
            for ys, iw in _uniform_inputs(field, m, c):
                res = protocols.secure_modulo_sum(ys, inner)
                total = res.outputs[1]
                derived = [ys[0] - total] + ys[1:]
                view = (_view_key(res.transcript, colluders, truncate_round),
                        tuple(derived[i - 1].indices() for i in colluders))
                atoms.append(((derived[secret_owner - 1].indices(), view), bw * iw))
    else:
        raise ValueError(f"no secrecy audit for protocol {protocol!r}")

    table = JointTable.from_atoms(("secret", "view"), atoms)
    return mutual_information(table, ("secret",), ("view",))


def _view_key(transcript, colluders, truncate_round=None):
    view = extract_view(transcript, colluders)
    msgs = view.broadcasts
    if truncate_round is not None:
        msgs = tuple(msg for msg in msgs if msg.round <= truncate_round)
    trimmed = type(view)(broadcasts=msgs, tapes=view.tapes)
    return trimmed.key()


def real_ideal_tv(hspec: protocols.HomomorphicSpec, inputs: Sequence[FieldVector],
                  corrupted: Sequence[int]):
    """Exact TV distance between the real execution distribution and the
    simulator-produced ideal distribution, for fixed inputs.

    Both distributions are over (coalition bundle shares, all broadcasts,
    honest outputs).  The simulator knows only the coalition's inputs and the
    functionality output: it draws the coalition's shares uniformly, replays
    the coalition's broadcasts, fills the other honest broadcasts with
    uniform values (the inner map is invertible, so honest broadcasts are
    uniform), and fixes the last one so the broadcast sum equals the output.
    """
    field, c, m = hspec.field, hspec.c, hspec.m
    team = sorted(set(corrupted))
    honest = [i for i in range(1, m + 1) if i not in team]
    if not honest:
        raise ValueError("at least one party must stay honest")

    real_atoms = []
    for idx, w in mzsr.ideal_distribution(field, m, c):
        bundle = _bundle_from_indices(field, m, c, idx)
        res = protocols.homomorphic_compute(hspec, list(inputs), bundle)
        zs = tuple(msg.payload.indices() for msg in res.transcript.messages)
        xs = tuple(bundle.share(i).indices() for i in team)
        ys = tuple(res.outputs[h].indices() for h in honest)
        real_atoms.append((((xs, zs, ys),), w))

    y_out = hspec.evaluate(list(inputs))
    ideal_atoms = []
    w_team = Fraction(1, field.order ** (c * len(team)))
    r = len(honest)
    w_fill = Fraction(1, field.order ** (c * (r - 1)))
    for x_team in itertools.product(all_vectors(field, c), repeat=len(team)):
        z = {}
        for i, x_i in zip(team, x_team):
            z[i] = hspec.f_tilde.apply(x_i + hspec.alphas[i - 1] * inputs[i - 1])
        for fills in itertools.product(all_vectors(field, c), repeat=r - 1):
            for h, val in zip(honest[:-1], fills):
                z[h] = val
            acc = y_out
            for i in range(1, m + 1):
                if i != honest[-1]:
                    acc = acc - z[i]
            z[honest[-1]] = acc
            zs = tuple(z[i].indices() for i in range(1, m + 1))
            xs = tuple(x.indices() for x in x_team)
            ys = tuple(y_out.indices() for _ in honest)
            ideal_atoms.append((((xs, zs, ys),), w_team * w_fill))

    real = JointTable.from_atoms(("atom",), real_atoms)
    ideal = JointTable.from_atoms(("atom",), ideal_atoms)
    return tv_distance(real, ideal)


def summation_identities(field: FieldSpec, m: int, c: int = 1) -> dict:
    """The three coalition cases for the summation-derived generator, as
    exact mutual informations in bits: the coalition's shares together with
    the public sum carry nothing about the target share."""
    names = [f"x{i}" for i in range(1, m + 1)] + ["s"]
    atoms = []
    for ys, w in _uniform_inputs(field, m, c):
        total = field.zero_vector(c)
        for y in ys:
            total = total + y
        shares = [ys[0] - total] + ys[1:]
        outcome = tuple(s.indices() for s in shares) + (total.indices(),)
        atoms.append((outcome, w))
    table = JointTable.from_atoms(names, atoms)
    mid = [f"x{i}" for i in range(2, m)]          # players 2..m-1 collude
    tail = [f"x{i}" for i in range(3, m + 1)]     # players 3..m collude
    side = ["x1"] + [f"x{i}" for i in range(3, m)]  # players 1,3..m-1 collude
    return {
        "I(x1; coalition 2..m-1, sum)": mutual_information(table, ("x1",), tuple(mid + ["s"])),
        "I(x2; coalition 3..m, sum)": mutual_information(table, ("x2",), tuple(tail + ["s"])),
        "I(x2; coalition 1,3..m-1, sum)": mutual_information(table, ("x2",), tuple(side + ["s"])),
    }
