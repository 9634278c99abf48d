"""The classical protocols that run over the broadcast channel and consume a
zero-sum bundle: modulo summation, additively homomorphic computation, two
secret-sharing variants, and two anonymous-authentication variants.

Player ids are 1-based throughout, matching the channel layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

from .channel import AdversaryModel, Party, Transcript, run_rounds
from .fields import (ExtFieldSpec, FieldElement, FieldSpec, FieldVector,
                     LinearMap)
from .mzsr import ZeroSumBundle


# --- protocol result containers ----------------------------------------------

@dataclass
class ProtocolResult:
    outputs: dict
    transcript: Transcript


@dataclass
class CheaterShareResult:
    outcome: str  # accept | reject | fail
    value: Optional[FieldElement]
    z_zero: bool
    denom_zero: bool
    transcript: Transcript


@dataclass
class AuthResult:
    accepted: bool
    total: FieldVector
    transcript: Transcript


# --- secure modulo summation ---------------------------------------------------

class _SumParty(Party):
    rounds = 1

    def __init__(self, pid, y, x):
        super().__init__(pid)
        self.y = y
        self.x = x
        self.tape = {"input": y, "share": x}

    def round_messages(self, rnd, view):
        return [self.y + self.x]

    def output(self, view):
        acc = None
        for msg in view.broadcasts:
            acc = msg.payload if acc is None else acc + msg.payload
        return acc


def secure_modulo_sum(inputs: Sequence[FieldVector], bundle: ZeroSumBundle,
                      adversary: Optional[AdversaryModel] = None,
                      sid: int = 0) -> ProtocolResult:
    """Each player broadcasts its masked input Z_i = Y_i + X_i; everyone sums
    the broadcasts, which telescopes to sum(Y) because the shares cancel."""
    m = bundle.m
    if len(inputs) != m:
        raise ValueError("need one input per player")
    for y in inputs:
        if y.field != bundle.field or len(y) != bundle.c:
            raise ValueError("input shape does not match the bundle")
    parties = [_SumParty(i + 1, inputs[i], bundle.share(i + 1)) for i in range(m)]
    transcript, outputs = run_rounds(parties, adversary, sid=sid)
    return ProtocolResult(outputs, transcript)


# --- additively homomorphic computation ---------------------------------------

@dataclass(frozen=True)
class HomomorphicSpec:
    """f(Y_1..Y_m) = f_tilde(alpha_1 Y_1 + ... + alpha_m Y_m) with
    componentwise multipliers alpha_i and an invertible linear inner map.

    Invertibility of f_tilde plus unit multipliers make the function
    sensitive: the output is uniform whenever any one argument is uniform.
    """

    field: FieldSpec
    c: int
    alphas: tuple
    f_tilde: LinearMap

    def __post_init__(self):
        if self.f_tilde.size != self.c or self.f_tilde.field != self.field:
            raise ValueError("inner map does not match (field, c)")
        if not self.f_tilde.is_invertible():
            raise ValueError("inner map must be invertible")
        for a in self.alphas:
            if a.field != self.field or len(a) != self.c:
                raise ValueError("multiplier shape mismatch")
            if any(e.is_zero() for e in a):
                raise ValueError("multipliers must be componentwise nonzero")

    @property
    def m(self) -> int:
        return len(self.alphas)

    def evaluate(self, inputs: Sequence[FieldVector]) -> FieldVector:
        acc = self.field.zero_vector(self.c)
        for a, y in zip(self.alphas, inputs):
            acc = acc + a * y
        return self.f_tilde.apply(acc)


class _HomomorphicParty(Party):
    rounds = 1

    def __init__(self, pid, y, x, alpha, f_tilde):
        super().__init__(pid)
        self.y = y
        self.x = x
        self.alpha = alpha
        self.f_tilde = f_tilde
        self.tape = {"input": y, "share": x}

    def round_messages(self, rnd, view):
        return [self.f_tilde.apply(self.x + self.alpha * self.y)]

    def output(self, view):
        acc = None
        for msg in view.broadcasts:
            acc = msg.payload if acc is None else acc + msg.payload
        return acc


def homomorphic_compute(spec: HomomorphicSpec, inputs: Sequence[FieldVector],
                        bundle: ZeroSumBundle,
                        adversary: Optional[AdversaryModel] = None,
                        sid: int = 0) -> ProtocolResult:
    """Each player broadcasts Z_i = f_tilde(X_i + alpha_i Y_i); additivity of
    the inner map makes the broadcast sum equal f(Y_1..Y_m)."""
    if spec.m != bundle.m or spec.c != bundle.c or spec.field != bundle.field:
        raise ValueError("spec does not match the bundle")
    parties = [
        _HomomorphicParty(i + 1, inputs[i], bundle.share(i + 1),
                          spec.alphas[i], spec.f_tilde)
        for i in range(spec.m)
    ]
    transcript, outputs = run_rounds(parties, adversary, sid=sid)
    return ProtocolResult(outputs, transcript)


# --- secret sharing ------------------------------------------------------------

class _BasicShareDealer(Party):
    rounds = 2

    def __init__(self, pid, secret, x):
        super().__init__(pid)
        self.secret = secret
        self.x = x
        self.tape = {"secret": secret, "share": x}

    def round_messages(self, rnd, view):
        return [self.x + self.secret] if rnd == 1 else []


class _BasicShareRelay(Party):
    rounds = 2

    def __init__(self, pid, x):
        super().__init__(pid)
        self.x = x
        self.tape = {"share": x}

    def round_messages(self, rnd, view):
        return [self.x] if rnd == 2 else []


class _BasicShareReceiver(Party):
    rounds = 2

    def __init__(self, pid, x):
        super().__init__(pid)
        self.x = x
        self.tape = {"share": x}

    def output(self, view):
        z = view.broadcasts[0].payload
        acc = z + self.x
        for msg in view.broadcasts[1:]:
            acc = acc + msg.payload
        return acc


def secret_share_basic(secret: FieldVector, bundle: ZeroSumBundle,
                       adversary: Optional[AdversaryModel] = None,
                       sid: int = 0) -> ProtocolResult:
    """Player 1 deals Z = X_1 + Y over the broadcast channel; players
    2..m-1 then reveal their shares; player m outputs Z + sum of the other
    shares plus its own, which equals Y."""
    m = bundle.m
    if m < 3:
        raise ValueError("need at least three players")
    parties = [_BasicShareDealer(1, secret, bundle.share(1))]
    for i in range(2, m):
        parties.append(_BasicShareRelay(i, bundle.share(i)))
    parties.append(_BasicShareReceiver(m, bundle.share(m)))
    transcript, outputs = run_rounds(parties, adversary, sid=sid, rounds=2)
    return ProtocolResult(outputs, transcript)


class _CheaterShareRelay(Party):
    rounds = 2

    def __init__(self, pid, x, offset=None):
        super().__init__(pid)
        self.x = x
        self.offset = offset
        self.tape = {"share": x}

    def round_messages(self, rnd, view):
        if rnd != 1:
            return []
        return [self.x + self.offset if self.offset is not None else self.x]


class _CheaterShareDealer(Party):
    rounds = 2

    def __init__(self, pid, x, secret_ext):
        super().__init__(pid)
        self.x = x
        self.secret_ext = secret_ext
        self.tape = {"share": x, "secret": secret_ext}

    def round_messages(self, rnd, view):
        return [self.x * self.secret_ext] if rnd == 2 else []


class _CheaterShareReceiver(Party):
    rounds = 2

    def __init__(self, pid, x, ext):
        super().__init__(pid)
        self.x = x
        self.ext = ext
        self.tape = {"share": x}

    def output(self, view):
        z = next(m.payload for m in view.broadcasts if m.round == 2)
        if z.is_zero():
            return {"outcome": "fail", "value": None,
                    "z_zero": True, "denom_zero": False}
        denom = self.x
        for msg in view.broadcasts:
            if msg.round == 1:
                denom = denom + msg.payload
        if denom.is_zero():
            # impossible in an honest run with Z != 0; reconstruction breaks
            return {"outcome": "fail", "value": None,
                    "z_zero": False, "denom_zero": True}
        candidate = -(z / denom)
        if self.ext.in_base_subfield(candidate):
            return {"outcome": "accept", "value": self.ext.project_base(candidate),
                    "z_zero": False, "denom_zero": False}
        return {"outcome": "reject", "value": None,
                "z_zero": False, "denom_zero": False}


def secret_share_cheater_detect(secret: FieldElement, ext: ExtFieldSpec,
                                bundle: ZeroSumBundle,
                                adversary: Optional[AdversaryModel] = None,
                                sid: int = 0) -> CheaterShareResult:
    """Cheater-detectable variant over the extension GF(q^c).

    Shares are lifted to the extension; players 2..m-1 reveal their lifted
    shares before the dealing so they cannot adapt to it, then player 1 deals
    Z = X_1 * Y.  Player m inverts the revealed-share sum and accepts only a
    candidate lying in the base subfield.  Z = 0 (a q^{-c} honest event)
    makes reconstruction impossible and is classified as fail, not cheating.
    """
    m = bundle.m
    if m < 3:
        raise ValueError("need at least three players")
    if secret.field != bundle.field or secret.is_zero():
        raise ValueError("secret must be a nonzero base-field element")
    if ext.base != bundle.field or ext.c != bundle.c:
        raise ValueError("extension does not match the bundle")
    lifted = [ext.lift(bundle.share(i)) for i in range(1, m + 1)]
    offsets = {}
    if adversary is not None and adversary.behavior == "modification":
        offsets = dict(adversary.params.get("offsets", {}))
        if "total_offset" in adversary.params:
            # apply the whole colluder offset through the lowest corrupted relay
            first = min(adversary.corrupted)
            offsets = {first: adversary.params["total_offset"]}
    parties = [_CheaterShareDealer(1, lifted[0], ext.embed_base(secret))]
    for i in range(2, m):
        parties.append(_CheaterShareRelay(i, lifted[i - 1], offsets.get(i)))
    parties.append(_CheaterShareReceiver(m, lifted[m - 1], ext))
    transcript, outputs = run_rounds(parties, adversary, sid=sid, rounds=2)
    res = outputs[m]
    return CheaterShareResult(outcome=res["outcome"], value=res["value"],
                              z_zero=res["z_zero"], denom_zero=res["denom_zero"],
                              transcript=transcript)


# --- Toeplitz message authentication -------------------------------------------

@dataclass(frozen=True)
class MacParams:
    """One player's hashing material: an e x d Toeplitz matrix and a mask,
    both carved from the player's bundle share (c = 2e + d - 1 symbols).

    Toeplitz layout: entry (i, j) is seed[e-1-i+j], so the first column read
    bottom-up is seed[0..e) and the first row is seed[e-1..e+d-1).
    """

    field: FieldSpec
    e: int
    d: int
    seed: FieldVector
    mask: FieldVector

    def __post_init__(self):
        if len(self.seed) != self.e + self.d - 1 or len(self.mask) != self.e:
            raise ValueError("seed/mask lengths do not match (e, d)")

    def row(self, i: int) -> FieldVector:
        return FieldVector(self.field, tuple(
            self.seed[self.e - 1 - i + j] for j in range(self.d)))

    def matvec(self, y: FieldVector) -> FieldVector:
        if len(y) != self.d:
            raise ValueError("vector length must be d")
        return FieldVector(self.field, tuple(
            self.row(i).dot(y) for i in range(self.e)))

    def tag(self, y: FieldVector) -> FieldVector:
        return self.matvec(y) + self.mask


def derive_mac_params(bundle: ZeroSumBundle, e: int, d: int) -> list:
    """Split each share into a Toeplitz seed (first e+d-1 symbols) and a mask
    (remaining e); linearity of the carve preserves the zero-sum property."""
    if 2 * e + d - 1 != bundle.c:
        raise ValueError(f"need c = 2e+d-1 = {2 * e + d - 1}, bundle has c = {bundle.c}")
    out = []
    for i in range(1, bundle.m + 1):
        share = bundle.share(i)
        seed = FieldVector(bundle.field, share.elems[:e + d - 1])
        mask = FieldVector(bundle.field, share.elems[e + d - 1:])
        out.append(MacParams(bundle.field, e, d, seed, mask))
    return out


# --- anonymous authentication ---------------------------------------------------

class _AuthVoter(Party):
    rounds = 1

    def __init__(self, pid, params, recognized, approve, rng, forced=None):
        super().__init__(pid)
        self.params = params
        self.recognized = recognized
        self.approve = approve
        self.rng = rng
        self.forced = forced
        self.tape = {"recognized": recognized, "approve": approve,
                     "seed": params.seed, "mask": params.mask}

    def vote(self) -> FieldVector:
        if self.forced is not None:
            return self.forced
        if self.approve:
            return self.params.tag(self.recognized)
        return self.params.field.random_vector(self.params.e, self.rng)

    def round_messages(self, rnd, view):
        return [self.vote()]


class _RushingVoter(_AuthVoter):
    rushing = True

    def round_messages(self, rnd, view):
        acc = self.params.field.zero_vector(self.params.e)
        for msg in view.broadcasts:
            if msg.round == rnd:
                acc = acc - msg.payload
        return [acc]


def _sum_round(broadcasts, rnd, zero):
    acc = zero
    for msg in broadcasts:
        if msg.round == rnd:
            acc = acc + msg.payload
    return acc


def anon_auth_basic(mac_params: Sequence[MacParams], recognized: Sequence[FieldVector],
                    approve: Sequence[bool], rng=None,
                    adversary: Optional[AdversaryModel] = None,
                    forced_votes: Optional[dict] = None,
                    sid: int = 0) -> AuthResult:
    """Every player broadcasts a vote: the Toeplitz tag of the project it
    recognizes when approving, a uniform vector otherwise.  The project is
    approved when the votes sum to zero.  A rushing corrupted player can
    force acceptance by negating the others' votes."""
    m = len(mac_params)
    field = mac_params[0].field
    e = mac_params[0].e
    forced_votes = forced_votes or {}
    parties = []
    for i in range(1, m + 1):
        cls = _AuthVoter
        if adversary is not None and adversary.behavior == "rushing" \
                and i in adversary.corrupted:
            cls = _RushingVoter
        parties.append(cls(i, mac_params[i - 1], recognized[i - 1],
                           approve[i - 1], rng, forced_votes.get(i)))
    transcript, _ = run_rounds(parties, adversary, sid=sid, rounds=1)
    total = _sum_round(transcript.messages, 1, field.zero_vector(e))
    return AuthResult(accepted=total.is_zero(), total=total, transcript=transcript)


class _SecureAuthVerifier(Party):
    """Player 1: keeps its own tag private, sums the received votes with it,
    and broadcasts the verdict."""

    rounds = 2

    def __init__(self, pid, params, recognized):
        super().__init__(pid)
        self.params = params
        self.recognized = recognized
        self.tape = {"recognized": recognized, "seed": params.seed,
                     "mask": params.mask}

    def round_messages(self, rnd, view):
        if rnd != 2:
            return []
        total = self.params.tag(self.recognized)
        total = _sum_round(view.broadcasts, 1, total)
        verdict = "accept" if total.is_zero() else "reject"
        self.tape["total"] = total
        return [verdict]

    def output(self, view):
        return next(m.payload for m in view.broadcasts if m.round == 2)


class _SecureAuthVoter(_AuthVoter):
    rounds = 2

    def round_messages(self, rnd, view):
        return [self.vote()] if rnd == 1 else []

    def output(self, view):
        return next(m.payload for m in view.broadcasts if m.round == 2)


class _CollusionVoter(Party):
    """Mismatched-recognition collusion against the verifier-based variant:
    votes as if approving the verifier's version of the project (the best
    deterministic guess, which wins exactly when the honest mismatch tags
    cancel)."""

    rounds = 2
    rushing = True

    def __init__(self, pid, params, target_info):
        super().__init__(pid)
        self.params = params
        self.target_info = target_info
        self.tape = {"seed": params.seed, "mask": params.mask}

    def round_messages(self, rnd, view):
        return [self.params.tag(self.target_info)] if rnd == 1 else []

    def output(self, view):
        return next(m.payload for m in view.broadcasts if m.round == 2)


def anon_auth_secure(mac_params: Sequence[MacParams], recognized: Sequence[FieldVector],
                     approve: Sequence[bool], rng=None,
                     adversary: Optional[AdversaryModel] = None,
                     forced_votes: Optional[dict] = None,
                     sid: int = 0) -> AuthResult:
    """Verifier-based variant that resists rushing: players 2..m broadcast
    their votes, the trusted player 1 adds its own private tag, and only the
    verdict is announced."""
    m = len(mac_params)
    field = mac_params[0].field
    e = mac_params[0].e
    forced_votes = forced_votes or {}
    parties = [_SecureAuthVerifier(1, mac_params[0], recognized[0])]
    for i in range(2, m + 1):
        if adversary is not None and i in adversary.corrupted \
                and adversary.behavior == "mismatched-recognition":
            parties.append(_CollusionVoter(i, mac_params[i - 1],
                                           adversary.params["target_info"]))
        else:
            parties.append(_SecureAuthVoter(i, mac_params[i - 1],
                                            recognized[i - 1], approve[i - 1],
                                            rng, forced_votes.get(i)))
    transcript, outputs = run_rounds(parties, adversary, sid=sid, rounds=2)
    total = transcript.tapes[1].get("total", field.zero_vector(e))
    return AuthResult(accepted=outputs[1] == "accept", total=total,
                      transcript=transcript)


# --- CLI-facing descriptors -----------------------------------------------------

PROTOCOLS = {
    "secure-sum": {
        "runner": "secure_modulo_sum",
        "params": {"m": int, "q": int, "c": int},
        "adversaries": ["semi-honest"],
    },
    "homomorphic": {
        "runner": "homomorphic_compute",
        "params": {"m": int, "q": int, "c": int, "map": ["identity", "swap"]},
        "adversaries": ["semi-honest"],
    },
    "basic-ss": {
        "runner": "secret_share_basic",
        "params": {"m": int, "q": int, "c": int},
        "adversaries": ["semi-honest"],
    },
    "cheater-ss": {
        "runner": "secret_share_cheater_detect",
        "params": {"m": int, "q": int, "c": int},
        "adversaries": ["semi-honest", "modification"],
    },
    "anon-auth": {
        "runner": "anon_auth_basic",
        "params": {"m": int, "q": int, "e": int, "d": int},
        "adversaries": ["semi-honest", "rushing"],
    },
    "anon-auth-secure": {
        "runner": "anon_auth_secure",
        "params": {"m": int, "q": int, "e": int, "d": int},
        "adversaries": ["semi-honest", "mismatched-recognition"],
    },
}
