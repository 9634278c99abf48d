"""Dense exact simulation of m qudits of dimension q.

Registers hold either a pure state vector of length q^m or a density matrix.
Party axes are 0-based here; the protocol layer's 1-based player ids are
shifted down by one when they reach this module.  Dimension is capped at
q^m <= 4096: desk scale needs no tensor networks.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .fields import FieldSpec

DIM_CAP = 4096
ATOL = 1e-9


class QuantumRegister:
    """m qudits of dimension q, as a pure vector or a density matrix."""

    def __init__(self, field: FieldSpec, m: int, vector=None, density=None):
        if m < 1:
            raise ValueError("need at least one party")
        q = field.order
        if q**m > DIM_CAP:
            raise ValueError(f"dimension {q}^{m} exceeds the cap {DIM_CAP}")
        self.field = field
        self.m = m
        self.q = q
        self.dim = q**m
        if (vector is None) == (density is None):
            raise ValueError("provide exactly one of vector or density")
        if vector is not None:
            vec = np.asarray(vector, dtype=complex).reshape(self.dim)
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > ATOL:
                raise ValueError(f"state norm {norm} is not 1")
            self.vector = vec
            self.rho = None
        else:
            rho = np.asarray(density, dtype=complex).reshape(self.dim, self.dim)
            if abs(np.trace(rho).real - 1.0) > ATOL or abs(np.trace(rho).imag) > ATOL:
                raise ValueError("density matrix trace is not 1")
            if not np.allclose(rho, rho.conj().T, atol=ATOL):
                raise ValueError("density matrix is not Hermitian")
            eigs = np.linalg.eigvalsh(rho)
            if eigs.min() < -ATOL:
                raise ValueError("density matrix is not positive semidefinite")
            self.vector = None
            self.rho = rho

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        return np.outer(self.vector, self.vector.conj())

    def clone(self) -> "QuantumRegister":
        if self.is_pure:
            return QuantumRegister(self.field, self.m, vector=self.vector.copy())
        return QuantumRegister(self.field, self.m, density=self.rho.copy())

    def index_to_outcomes(self, idx: int) -> tuple:
        """Big-endian digits: party 0 is the most significant."""
        out = []
        for _ in range(self.m):
            out.append(idx % self.q)
            idx //= self.q
        return tuple(reversed(out))

    def outcomes_to_index(self, outcomes: Sequence[int]) -> int:
        idx = 0
        for x in outcomes:
            idx = idx * self.q + int(x)
        return idx

    def to_json(self) -> dict:
        data = {"m": self.m, "q": self.q, "pure": self.is_pure}
        if self.is_pure:
            data["amplitudes"] = [[z.real, z.imag] for z in self.vector]
        else:
            data["density"] = [[[z.real, z.imag] for z in row] for row in self.rho]
        return data


def computational_state(field: FieldSpec, m: int, values: Sequence[int]) -> QuantumRegister:
    q = field.order
    vec = np.zeros(q**m, dtype=complex)
    idx = 0
    for x in values:
        idx = idx * q + int(x) % q
    vec[idx] = 1.0
    return QuantumRegister(field, m, vector=vec)


def fully_mixed(field: FieldSpec, m: int) -> QuantumRegister:
    d = field.order**m
    return QuantumRegister(field, m, density=np.eye(d) / d)


def zero_sum_indices(field: FieldSpec, m: int) -> list:
    """Basis indices of computational strings with zero field sum."""
    q = field.order
    out = []
    for head in itertools.product(range(q), repeat=m - 1):
        last = 0
        for x in head:
            last = field.add_idx(last, x)
        last = field.neg_idx(last)
        idx = 0
        for x in head + (last,):
            idx = idx * q + x
        out.append(idx)
    return sorted(out)


def ghz_phase_state(field: FieldSpec, m: int) -> QuantumRegister:
    """Uniform superposition over all computational strings summing to zero.

    Equivalently the GHZ state written in the phase basis; amplitude is
    q^{-(m-1)/2} on each of the q^{m-1} zero-sum strings.
    """
    if m < 2:
        raise ValueError("need at least two parties")
    q = field.order
    vec = np.zeros(q**m, dtype=complex)
    amp = q ** (-(m - 1) / 2.0)
    for idx in zero_sum_indices(field, m):
        vec[idx] = amp
    return QuantumRegister(field, m, vector=vec)


def phase_matrix(field: FieldSpec) -> np.ndarray:
    """Columns are the phase-basis states: W[x, z] = w^{-tr(xz)} / sqrt(q),
    with w = exp(2 pi i / p) and tr the absolute field trace."""
    q = field.order
    w = cmath.exp(2j * cmath.pi / field.p)
    mat = np.empty((q, q), dtype=complex)
    for x in range(q):
        for z in range(q):
            mat[x, z] = w ** (-field.trace_idx(field.mul_idx(x, z)))
    return mat / math.sqrt(q)


# --- observables ------------------------------------------------------------

_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _single_matrix(kind: str) -> np.ndarray:
    if kind == "Z":
        return _PAULI_Z
    if kind == "X":
        return _PAULI_X
    if kind == "A0":
        return (_PAULI_X + _PAULI_Z) / math.sqrt(2)
    if kind == "A1":
        return (_PAULI_X - _PAULI_Z) / math.sqrt(2)
    raise ValueError(f"unknown observable kind {kind!r}")


def _eigenbasis(kind: str):
    """(V, evals) with V columns the eigenvectors, eigenvalues sorted +1, -1."""
    mat = _single_matrix(kind)
    evals, vecs = np.linalg.eigh(mat)
    order = np.argsort(-evals)
    return vecs[:, order], evals[order]


@dataclass(frozen=True)
class Observable:
    """A +/-1-valued observable: Z, X, or A(k)=(X+(-1)^k Z)/sqrt(2) on one
    party, or an ordered composite whose outcome is the product of the
    per-party +/-1 results.  Defined for q = 2 only."""

    terms: tuple  # tuple of (party, kind)

    @classmethod
    def z(cls, party: int) -> "Observable":
        return cls(((party, "Z"),))

    @classmethod
    def x(cls, party: int) -> "Observable":
        return cls(((party, "X"),))

    @classmethod
    def a(cls, k: int, party: int) -> "Observable":
        if k not in (0, 1):
            raise ValueError("k must be 0 or 1")
        return cls(((party, f"A{k}"),))

    @classmethod
    def composite(cls, terms: Sequence) -> "Observable":
        flat = []
        for t in terms:
            if isinstance(t, Observable):
                flat.extend(t.terms)
            else:
                flat.append((int(t[0]), t[1]))
        parties = [p for p, _ in flat]
        if len(set(parties)) != len(parties):
            raise ValueError("composite observable parties must be distinct")
        return cls(tuple(flat))

    def __mul__(self, other: "Observable") -> "Observable":
        return Observable.composite([self, other])

    def matrix(self, q: int, m: int) -> np.ndarray:
        if q != 2:
            raise ValueError("observables are defined for q = 2 only")
        per_party = {p: _single_matrix(kind) for p, kind in self.terms}
        out = np.array([[1.0 + 0j]])
        for i in range(m):
            out = np.kron(out, per_party.get(i, np.eye(2, dtype=complex)))
        return out


def _rotation_full(reg: QuantumRegister, per_party: dict) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for i in range(reg.m):
        out = np.kron(out, per_party.get(i, np.eye(reg.q, dtype=complex)))
    return out


def _probs_in_basis(reg: QuantumRegister, per_party_unitaries: dict) -> np.ndarray:
    """Computational probabilities after rotating chosen parties by V^dagger."""
    u = _rotation_full(reg, per_party_unitaries)
    if reg.is_pure:
        psi = u.conj().T @ reg.vector
        probs = np.abs(psi) ** 2
    else:
        probs = np.real(np.diag(u.conj().T @ reg.rho @ u))
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def computational_distribution(reg: QuantumRegister) -> np.ndarray:
    """Exact Born probabilities over all q^m computational outcomes."""
    return _probs_in_basis(reg, {})


def phase_distribution(reg: QuantumRegister) -> np.ndarray:
    """Exact probabilities of per-party phase-basis outcomes."""
    w = phase_matrix(reg.field)
    return _probs_in_basis(reg, {i: w for i in range(reg.m)})


def measure_computational(reg: QuantumRegister, rng) -> tuple:
    """Sample all parties in the computational basis; returns (outcomes,
    collapsed register) with outcomes a tuple of field-element indices."""
    probs = computational_distribution(reg)
    idx = int(rng.choice(reg.dim, p=probs))
    outcomes = reg.index_to_outcomes(idx)
    return outcomes, computational_state(reg.field, reg.m, outcomes)


def measure_phase(reg: QuantumRegister, rng) -> tuple:
    """Sample all parties in the phase basis; collapsed state is the product
    of the sampled phase-basis vectors."""
    probs = phase_distribution(reg)
    idx = int(rng.choice(reg.dim, p=probs))
    outcomes = reg.index_to_outcomes(idx)
    w = phase_matrix(reg.field)
    psi = np.array([1.0 + 0j])
    for z in outcomes:
        psi = np.kron(psi, w[:, z])
    return outcomes, QuantumRegister(reg.field, reg.m, vector=psi)


def setting_distribution(reg: QuantumRegister, settings: Sequence) -> tuple:
    """Joint distribution of +/-1 outcomes for per-party observable settings.

    settings is a list of (party, kind); returns (outcome_tuples, probs)
    where outcome_tuples[i] is a tuple of +/-1 aligned with settings.
    """
    if reg.q != 2:
        raise ValueError("+/-1 settings are defined for q = 2 only")
    rot = {p: _eigenbasis(kind)[0] for p, kind in settings}
    probs_full = _probs_in_basis(reg, rot).reshape((reg.q,) * reg.m)
    measured = [p for p, _ in settings]
    other = [i for i in range(reg.m) if i not in measured]
    marg = probs_full.sum(axis=tuple(other)) if other else probs_full
    # marg axes run over ascending party index; map back to settings order
    sorted_pos = np.argsort(measured)
    outcomes = []
    probs = []
    for digits in itertools.product((0, 1), repeat=len(settings)):
        axis_index = tuple(digits[i] for i in sorted_pos)
        probs.append(float(marg[axis_index]))
        outcomes.append(tuple(1 if d == 0 else -1 for d in digits))
    probs = np.clip(np.array(probs), 0.0, None)
    return outcomes, probs / probs.sum()


def measure_observable(reg: QuantumRegister, obs: Observable, rng) -> tuple:
    """Measure a +/-1 observable (composites party by party, multiplying the
    +/-1 results); returns (outcome, collapsed register)."""
    outcomes, probs = setting_distribution(reg, obs.terms)
    pick = int(rng.choice(len(outcomes), p=probs))
    per_party = outcomes[pick]
    # collapse party by party onto the observed eigenvectors
    proj = {}
    for (party, kind), val in zip(obs.terms, per_party):
        v, evals = _eigenbasis(kind)
        col = 0 if val == 1 else 1
        e = v[:, col].reshape(-1, 1)
        proj[party] = e @ e.conj().T
    p_full = _rotation_full(reg, proj)
    if reg.is_pure:
        psi = p_full @ reg.vector
        psi = psi / np.linalg.norm(psi)
        collapsed = QuantumRegister(reg.field, reg.m, vector=psi)
    else:
        rho = p_full @ reg.rho @ p_full.conj().T
        rho = rho / np.trace(rho).real
        collapsed = QuantumRegister(reg.field, reg.m, density=rho)
    product = 1
    for val in per_party:
        product *= val
    return product, collapsed


def expectation(reg: QuantumRegister, obs: Observable) -> float:
    """Exact <O> = Tr(rho O)."""
    mat = obs.matrix(reg.q, reg.m)
    if reg.is_pure:
        return float(np.real(reg.vector.conj() @ mat @ reg.vector))
    return float(np.real(np.trace(reg.rho @ mat)))


# --- projectors -------------------------------------------------------------

class Projector:
    """Idempotent Hermitian projector with a named construction."""

    def __init__(self, kind: str, matrix: np.ndarray):
        self.kind = kind
        mat = np.asarray(matrix, dtype=complex)
        if not np.allclose(mat, mat.conj().T, atol=ATOL):
            raise ValueError("projector is not Hermitian")
        if not np.allclose(mat @ mat, mat, atol=ATOL):
            raise ValueError("projector is not idempotent")
        self.matrix = mat

    @classmethod
    def zero_sum(cls, field: FieldSpec, m: int) -> "Projector":
        """Projects onto computational strings whose field sum is zero."""
        d = field.order**m
        mat = np.zeros((d, d), dtype=complex)
        for idx in zero_sum_indices(field, m):
            mat[idx, idx] = 1.0
        return cls("zero_sum", mat)

    @classmethod
    def phase_equal(cls, field: FieldSpec, m: int) -> "Projector":
        """Projects onto the all-parties-equal phase-basis states."""
        q = field.order
        w = phase_matrix(field)
        d = q**m
        mat = np.zeros((d, d), dtype=complex)
        for z in range(q):
            psi = np.array([1.0 + 0j])
            for _ in range(m):
                psi = np.kron(psi, w[:, z])
            mat += np.outer(psi, psi.conj())
        return cls("phase_equal", mat)

    @classmethod
    def ghz(cls, field: FieldSpec, m: int) -> "Projector":
        psi = ghz_phase_state(field, m).vector
        return cls("ghz", np.outer(psi, psi.conj()))

    @classmethod
    def custom(cls, matrix) -> "Projector":
        return cls("custom", matrix)


def project_probability(reg: QuantumRegister, proj: Projector) -> float:
    """Tr(rho P)."""
    if proj.matrix.shape[0] != reg.dim:
        raise ValueError("projector dimension does not match the register")
    if reg.is_pure:
        val = np.real(reg.vector.conj() @ proj.matrix @ reg.vector)
    else:
        val = np.real(np.trace(reg.rho @ proj.matrix))
    return float(min(max(val, 0.0), 1.0))


# --- noise ------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Per-party depolarizing or dephasing noise, or probabilistic
    replacement of the whole register by a supplied one."""

    kind: str = "none"
    eps: float = 0.0
    replacement: Optional[QuantumRegister] = None

    def __post_init__(self):
        if self.kind not in ("none", "depolarizing", "dephasing", "replacement"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("noise strength must be in [0, 1]")
        if self.kind == "replacement" and self.replacement is None:
            raise ValueError("replacement noise needs a register")

    def to_json(self) -> dict:
        return {"kind": self.kind, "eps": self.eps}


def _partial_trace_insert_mixed(rho: np.ndarray, m: int, q: int, party: int) -> np.ndarray:
    """Replace the given party's subsystem with the maximally mixed state."""
    t = rho.reshape((q,) * (2 * m))
    reduced = np.trace(t, axis1=party, axis2=m + party)
    eye = np.eye(q) / q
    # reduced has ket axes [others...] then bra axes [others...]
    out = np.tensordot(eye, reduced, axes=0)  # axes: i, i', ket-others, bra-others
    others = [k for k in range(m) if k != party]
    ket_perm = [0] * m
    bra_perm = [0] * m
    ket_perm[party] = 0
    bra_perm[party] = 1
    for pos, k in enumerate(others):
        ket_perm[k] = 2 + pos
        bra_perm[k] = 2 + (m - 1) + pos
    out = np.transpose(out, axes=ket_perm + bra_perm)
    return out.reshape(q**m, q**m)


def _dephase_party(rho: np.ndarray, m: int, q: int, party: int) -> np.ndarray:
    t = rho.reshape((q,) * (2 * m)).copy()
    idx_ket = np.arange(q)
    mask = np.zeros((q, q))
    mask[idx_ket, idx_ket] = 1.0
    shape = [1] * (2 * m)
    shape[party] = q
    shape[m + party] = q
    t = t * mask.reshape(shape)
    return t.reshape(q**m, q**m)


def apply_noise(reg: QuantumRegister, model: NoiseModel, rng=None) -> QuantumRegister:
    """Apply the channel exactly; eps = 0 is the identity.  Mixing noise
    returns a density-matrix register; trace is preserved."""
    if model.kind == "none" or model.eps == 0.0:
        return reg
    if model.kind == "replacement":
        rho = (1.0 - model.eps) * reg.density() + model.eps * model.replacement.density()
        return QuantumRegister(reg.field, reg.m, density=rho)
    rho = reg.density()
    for party in range(reg.m):
        if model.kind == "depolarizing":
            mixed = _partial_trace_insert_mixed(rho, reg.m, reg.q, party)
            rho = (1.0 - model.eps) * rho + model.eps * mixed
        else:  # dephasing
            rho = (1.0 - model.eps) * rho + model.eps * _dephase_party(
                rho, reg.m, reg.q, party)
    return QuantumRegister(reg.field, reg.m, density=rho)
