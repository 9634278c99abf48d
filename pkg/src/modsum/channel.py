"""Simulated broadcast public channel with a synchronous party runtime.

Every posted message is delivered identically to all parties and can be
neither altered nor blocked.  Rounds are synchronous; a rushing corrupted
party sees the honest parties' messages of the current round before emitting
its own, which is the only scheduling advantage an adversary gets here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Optional, Sequence

from .fields import FieldElement, FieldVector


class ProtocolAbort(RuntimeError):
    """A party program fault; carries the diagnostic transcript."""

    def __init__(self, message, transcript):
        super().__init__(message)
        self.transcript = transcript


def payload_to_json(payload):
    if isinstance(payload, FieldVector):
        return {"vec": payload.to_json()}
    if isinstance(payload, FieldElement):
        return {"elem": payload.to_json()}
    if isinstance(payload, (list, tuple)):
        return [payload_to_json(p) for p in payload]
    if isinstance(payload, dict):
        return {k: payload_to_json(v) for k, v in payload.items()}
    return payload


def payload_key(payload):
    """Hashable canonical encoding of a payload, for exact enumeration."""
    if isinstance(payload, FieldVector):
        return payload.indices()
    if isinstance(payload, FieldElement):
        return payload.index
    if isinstance(payload, (list, tuple)):
        return tuple(payload_key(p) for p in payload)
    if isinstance(payload, dict):
        return tuple(sorted((k, payload_key(v)) for k, v in payload.items()))
    return payload


@dataclass(frozen=True)
class BroadcastMessage:
    sender: int
    round: int
    sid: int
    payload: object

    def to_json(self) -> dict:
        return {"sid": self.sid, "round": self.round, "sender": self.sender,
                "payload": payload_to_json(self.payload)}


@dataclass
class Transcript:
    """Ordered broadcast messages plus per-party private tapes."""

    sid: int
    messages: list = dc_field(default_factory=list)
    tapes: dict = dc_field(default_factory=dict)

    def post(self, msg: BroadcastMessage) -> None:
        self.messages.append(msg)

    def broadcasts(self, round: Optional[int] = None,
                   sender: Optional[int] = None) -> list:
        out = self.messages
        if round is not None:
            out = [m for m in out if m.round == round]
        if sender is not None:
            out = [m for m in out if m.sender == sender]
        return list(out)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(m.to_json(), sort_keys=True)
                         for m in self.messages)

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()


@dataclass(frozen=True)
class View:
    """What a coalition sees: every broadcast plus the coalition's tapes."""

    broadcasts: tuple
    tapes: dict

    def key(self) -> tuple:
        """Canonical hashable encoding for exact joint-distribution builds."""
        msg_part = tuple((m.sender, m.round, payload_key(m.payload))
                         for m in self.broadcasts)
        tape_part = tuple(sorted(
            (pid, tuple(sorted((k, payload_key(v)) for k, v in tape.items())))
            for pid, tape in self.tapes.items()))
        return (msg_part, tape_part)


def extract_view(transcript: Transcript, subset: Iterable[int]) -> View:
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("subset must be nonempty")
    return View(broadcasts=tuple(transcript.messages),
                tapes={pid: dict(transcript.tapes.get(pid, {})) for pid in subset})


@dataclass(frozen=True)
class AdversaryModel:
    """Corrupted set plus a behavior tag interpreted by the protocol layer."""

    corrupted: frozenset
    behavior: str = "semi-honest"
    params: dict = dc_field(default_factory=dict)

    BEHAVIORS = ("semi-honest", "modification", "rushing", "mismatched-recognition")

    def __post_init__(self):
        object.__setattr__(self, "corrupted", frozenset(self.corrupted))
        if self.behavior not in self.BEHAVIORS:
            raise ValueError(f"unknown adversary behavior {self.behavior!r}")

    @property
    def rushing(self) -> bool:
        # both rushing-style behaviors act on the current round's messages
        return self.behavior in ("rushing", "mismatched-recognition")

    def validate(self, m: int) -> None:
        if any(not 1 <= pid <= m for pid in self.corrupted):
            raise ValueError("corrupted ids out of range")
        if len(self.corrupted) > m - 1:
            raise ValueError("adversary must leave at least one honest party")


class Party:
    """Base party program.  Subclasses implement round_messages/output.

    The runtime passes the full public transcript so far (plus, for rushing
    parties, the current round's honest messages) and the party's own tape.
    """

    rounds = 1
    rushing = False

    def __init__(self, pid: int):
        self.pid = pid
        self.tape: dict = {}

    def round_messages(self, rnd: int, view: View) -> list:
        return []

    def output(self, view: View):
        return None


def run_rounds(parties: Sequence[Party], adversary: Optional[AdversaryModel] = None,
               rng=None, sid: int = 0, rounds: Optional[int] = None):
    """Execute a synchronous protocol; returns (transcript, outputs by pid).

    Within each round, non-rushing parties emit first (ascending pid), then
    rushing corrupted parties emit with the round's earlier messages already
    visible.  Deterministic given the parties' tapes and the rng state.
    """
    parties = sorted(parties, key=lambda p: p.pid)
    if len({p.pid for p in parties}) != len(parties):
        raise ValueError("duplicate party ids")
    m = len(parties)
    if adversary is not None:
        adversary.validate(m)
    total_rounds = rounds if rounds is not None else max(p.rounds for p in parties)
    transcript = Transcript(sid=sid)
    for p in parties:
        transcript.tapes[p.pid] = p.tape

    def view_for(p: Party) -> View:
        return View(broadcasts=tuple(transcript.messages),
                    tapes={p.pid: p.tape})

    for rnd in range(1, total_rounds + 1):
        early = [p for p in parties if not p.rushing]
        late = [p for p in parties if p.rushing]
        staged = []
        for p in early:
            staged.extend(_collect(p, rnd, view_for(p), transcript, sid))
        # rushing parties observe this round's staged messages before emitting
        for msg in staged:
            transcript.post(msg)
        for p in late:
            for msg in _collect(p, rnd, view_for(p), transcript, sid):
                transcript.post(msg)

    outputs = {}
    for p in parties:
        try:
            outputs[p.pid] = p.output(view_for(p))
        except Exception as e:  # noqa: BLE001 - diagnostic abort path
            raise ProtocolAbort(f"party {p.pid} output failed: {e}", transcript) from e
    return transcript, outputs


def _collect(p: Party, rnd: int, view: View, transcript: Transcript, sid: int):
    try:
        payloads = p.round_messages(rnd, view)
    except Exception as e:  # noqa: BLE001 - diagnostic abort path
        raise ProtocolAbort(f"party {p.pid} failed in round {rnd}: {e}",
                            transcript) from e
    return [BroadcastMessage(sender=p.pid, round=rnd, sid=sid, payload=pl)
            for pl in payloads or []]
