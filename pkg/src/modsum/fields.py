"""Exact arithmetic in small prime-power fields, their extensions, and vectors.

Elements of GF(p^l) are coefficient vectors over F_p, canonically encoded as
integers in [0, q) via little-endian base-p digits.  All operation tables are
precomputed lazily; at desk scale (q <= 256) this is both simple and fast.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(n**0.5) + 1):
        if n % d == 0:
            return False
    return True


# Fixed irreducible polynomials (little-endian coefficients, monic) for every
# prime power p^l <= 256 with l >= 2.  Overridable per FieldSpec.
IRREDUCIBLE_POLYS = {
    (2, 2): (1, 1, 1),                    # x^2 + x + 1
    (2, 3): (1, 1, 0, 1),                 # x^3 + x + 1
    (2, 4): (1, 1, 0, 0, 1),              # x^4 + x + 1
    (2, 5): (1, 0, 1, 0, 0, 1),           # x^5 + x^2 + 1
    (2, 6): (1, 1, 0, 0, 0, 0, 1),        # x^6 + x + 1
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),     # x^7 + x + 1
    (2, 8): (1, 1, 0, 1, 1, 0, 0, 0, 1),  # x^8 + x^4 + x^3 + x + 1
    (3, 2): (1, 0, 1),                    # x^2 + 1
    (3, 3): (1, 2, 0, 1),                 # x^3 + 2x + 1
    (3, 4): (2, 1, 0, 0, 1),              # x^4 + x + 2
    (3, 5): (1, 2, 0, 0, 0, 1),           # x^5 + 2x + 1
    (5, 2): (2, 1, 1),                    # x^2 + x + 2
    (5, 3): (1, 1, 0, 1),                 # x^3 + x + 1
    (7, 2): (1, 0, 1),                    # x^2 + 1
    (11, 2): (1, 1, 1),                   # x^2 + x + 1
    (13, 2): (2, 1, 1),                   # x^2 + x + 2
}


class _ScalarRing:
    """Coefficient arithmetic used by the generic polynomial machinery.

    Scalars are ints: residues mod p for a prime field, or element indices
    of a base FieldSpec for a relative extension.
    """

    def __init__(self, order, add, mul, neg):
        self.order = order
        self.add = add
        self.mul = mul
        self.neg = neg

    def sub(self, a, b):
        return self.add(a, self.neg(b))


def _poly_trim(coeffs):
    i = len(coeffs)
    while i > 0 and coeffs[i - 1] == 0:
        i -= 1
    return coeffs[:i]


def _poly_mul(ring, a, b):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = ring.add(out[i + j], ring.mul(ai, bj))
    return _poly_trim(out)


def _poly_mod(ring, a, mod):
    """Remainder of a by the monic polynomial mod."""
    a = list(a)
    deg_m = len(mod) - 1
    while len(_poly_trim(a)) - 1 >= deg_m:
        a = _poly_trim(a)
        shift = len(a) - 1 - deg_m
        lead = a[-1]
        for i, mi in enumerate(mod):
            a[shift + i] = ring.sub(a[shift + i], ring.mul(lead, mi))
        a = a[:-1]
    return _poly_trim(a)


def _is_irreducible(ring, poly):
    """Brute-force irreducibility: no monic divisor of degree 1..deg/2."""
    deg = len(poly) - 1
    if deg < 1 or poly[-1] != 1:
        return False
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(ring.order), repeat=d):
            divisor = list(tail) + [1]
            if not _poly_mod(ring, list(poly), divisor):
                return False
    return True


def _find_irreducible(ring, degree):
    """Deterministic scan for a monic irreducible polynomial of given degree."""
    for tail in itertools.product(range(ring.order), repeat=degree):
        cand = tuple(tail) + (1,)
        if cand[0] != 0 and _is_irreducible(ring, cand):
            return cand
    raise ValueError(f"no irreducible polynomial of degree {degree} found")


class _TableField:
    """Shared table-backed field core; subclasses define the coefficient ring."""

    order: int
    _ring: _ScalarRing
    _degree: int
    _radix: int
    _modulus: tuple

    def _init_tables(self):
        self._add_table = None
        self._mul_table = None
        self._inv_table = None

    # -- index <-> coefficient tuple -------------------------------------
    def index_to_coeffs(self, idx: int) -> tuple:
        out = []
        for _ in range(self._degree):
            out.append(idx % self._radix)
            idx //= self._radix
        return tuple(out)

    def coeffs_to_index(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self._degree:
            raise ValueError("coefficient vector too long")
        idx = 0
        for c in reversed(list(coeffs)):
            idx = idx * self._radix + c % self._radix
        return idx

    # -- raw index arithmetic ---------------------------------------------
    def _build_tables(self):
        q = self.order
        ring = self._ring
        mod = list(self._modulus)
        coeffs = [list(self.index_to_coeffs(i)) for i in range(q)]
        self._add_table = [
            [self.coeffs_to_index([ring.add(x, y) for x, y in zip(a, b)])
             for b in coeffs]
            for a in coeffs
        ]
        mul = []
        for a in coeffs:
            row = []
            for b in coeffs:
                prod = _poly_mod(ring, _poly_mul(ring, _poly_trim(a), _poly_trim(b)), mod)
                row.append(self.coeffs_to_index(prod))
            mul.append(row)
        self._mul_table = mul
        inv = [None] * q
        for a in range(1, q):
            for b in range(1, q):
                if mul[a][b] == 1:
                    inv[a] = b
                    break
        self._inv_table = inv

    def _ensure_tables(self):
        if self._mul_table is None:
            self._build_tables()

    def add_idx(self, a: int, b: int) -> int:
        self._ensure_tables()
        return self._add_table[a][b]

    def neg_idx(self, a: int) -> int:
        return self.coeffs_to_index(
            [self._ring.neg(c) for c in self.index_to_coeffs(a)])

    def sub_idx(self, a: int, b: int) -> int:
        return self.add_idx(a, self.neg_idx(b))

    def mul_idx(self, a: int, b: int) -> int:
        self._ensure_tables()
        return self._mul_table[a][b]

    def inv_idx(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero is not invertible")
        self._ensure_tables()
        return self._inv_table[a]

    # -- element API -------------------------------------------------------
    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise ValueError("element belongs to a different field")
            return value
        if isinstance(value, (list, tuple)):
            return FieldElement(self, self.coeffs_to_index(value))
        return FieldElement(self, int(value) % self.order)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def elements(self) -> Iterator["FieldElement"]:
        for i in range(self.order):
            yield FieldElement(self, i)

    def random_element(self, rng) -> "FieldElement":
        return FieldElement(self, int(rng.integers(self.order)))

    def vector(self, values: Iterable) -> "FieldVector":
        return FieldVector(self, tuple(self.element(v) for v in values))

    def zero_vector(self, length: int) -> "FieldVector":
        return FieldVector(self, (self.zero,) * length)

    def random_vector(self, length: int, rng) -> "FieldVector":
        return FieldVector(self, tuple(self.random_element(rng) for _ in range(length)))


class FieldSpec(_TableField):
    """A finite field GF(p^l) with a monic irreducible modulus over F_p.

    q = p^l; elements are little-endian coefficient vectors over F_p.
    """

    def __init__(self, p: int, ell: int = 1, poly: Sequence[int] | None = None):
        if not is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if ell < 1:
            raise ValueError("extension degree must be >= 1")
        self.p = p
        self.ell = ell
        self.order = p**ell
        ring = _ScalarRing(p, lambda a, b: (a + b) % p,
                           lambda a, b: (a * b) % p, lambda a: (-a) % p)
        if poly is None:
            if ell == 1:
                poly = (0, 1)
            else:
                poly = IRREDUCIBLE_POLYS.get((p, ell)) or _find_irreducible(ring, ell)
        poly = tuple(c % p for c in poly)
        if len(poly) != ell + 1 or poly[-1] != 1:
            raise ValueError("modulus must be monic of degree ell")
        if not _is_irreducible(ring, poly):
            raise ValueError(f"{poly} is not irreducible over F_{p}")
        self.poly = poly
        self._ring = ring
        self._degree = ell
        self._radix = p
        self._modulus = poly
        self._init_tables()

    @classmethod
    def from_order(cls, q: int, poly: Sequence[int] | None = None) -> "FieldSpec":
        for p in range(2, q + 1):
            if is_prime(p):
                ell = 0
                n = q
                while n % p == 0:
                    n //= p
                    ell += 1
                if n == 1:
                    return cls(p, ell, poly)
                if q % p == 0:
                    break
        raise ValueError(f"{q} is not a prime power")

    def trace_idx(self, a: int) -> int:
        """Absolute trace a + a^p + ... + a^(p^(l-1)), as a residue mod p."""
        acc = 0
        frob = a
        for _ in range(self.ell):
            acc = self.add_idx(acc, frob)
            frob = self._pow_idx(frob, self.p)
        coeffs = self.index_to_coeffs(acc)
        if any(coeffs[1:]):
            raise AssertionError("trace left the prime field")
        return coeffs[0]

    def _pow_idx(self, a: int, n: int) -> int:
        out = 1
        base = a
        while n:
            if n & 1:
                out = self.mul_idx(out, base)
            base = self.mul_idx(base, base)
            n >>= 1
        return out

    def prime_subfield(self) -> "FieldSpec":
        return FieldSpec(self.p, 1)

    def __eq__(self, other):
        return (isinstance(other, FieldSpec) and self.p == other.p
                and self.ell == other.ell and self.poly == other.poly)

    def __hash__(self):
        return hash(("FieldSpec", self.p, self.ell, self.poly))

    def __repr__(self):
        return f"GF({self.order})"

    def to_json(self) -> dict:
        return {"p": self.p, "ell": self.ell, "poly": list(self.poly)}

    @classmethod
    def from_json(cls, data: dict) -> "FieldSpec":
        return cls(data["p"], data["ell"], tuple(data["poly"]))


class ExtFieldSpec(_TableField):
    """GF(q^c) built as a degree-c extension of a base FieldSpec.

    Identifies the vector space F_q^c with the extension field: lift/lower
    convert between length-c vectors over the base and single elements, and
    this identification is an isomorphism of additive groups.
    """

    def __init__(self, base: FieldSpec, c: int, poly: Sequence | None = None):
        if c < 1:
            raise ValueError("extension degree must be >= 1")
        self.base = base
        self.c = c
        self.order = base.order**c
        ring = _ScalarRing(base.order, base.add_idx, base.mul_idx, base.neg_idx)
        if poly is None:
            poly = _find_irreducible(ring, c)
        else:
            poly = tuple(p.index if isinstance(p, FieldElement) else int(p)
                         for p in poly)
        if len(poly) != c + 1 or poly[-1] != 1:
            raise ValueError("modulus must be monic of degree c")
        if not _is_irreducible(ring, poly):
            raise ValueError("modulus is not irreducible over the base field")
        self.poly = poly
        self._ring = ring
        self._degree = c
        self._radix = base.order
        self._modulus = poly
        self._init_tables()

    def lift(self, vec: "FieldVector") -> "FieldElement":
        """Identify a length-c vector over the base with an extension element."""
        if vec.field != self.base:
            raise ValueError("vector is not over the base field")
        if len(vec) != self.c:
            raise ValueError(f"expected length {self.c}, got {len(vec)}")
        return FieldElement(self, self.coeffs_to_index([e.index for e in vec]))

    def lower(self, x: "FieldElement") -> "FieldVector":
        if x.field != self:
            raise ValueError("element belongs to a different field")
        return FieldVector(self.base, tuple(
            FieldElement(self.base, c) for c in self.index_to_coeffs(x.index)))

    def embed_base(self, a: "FieldElement") -> "FieldElement":
        """Embed a base-field element as a constant of the extension."""
        if a.field != self.base:
            raise ValueError("element is not in the base field")
        return FieldElement(self, a.index)

    def in_base_subfield(self, x: "FieldElement") -> bool:
        """Whether x lies in the embedded copy of the base field."""
        if x.field != self:
            raise ValueError("element belongs to a different field")
        return all(c == 0 for c in self.index_to_coeffs(x.index)[1:])

    def project_base(self, x: "FieldElement") -> "FieldElement":
        if not self.in_base_subfield(x):
            raise ValueError("element is not in the base subfield")
        return FieldElement(self.base, self.index_to_coeffs(x.index)[0])

    def __eq__(self, other):
        return (isinstance(other, ExtFieldSpec) and self.base == other.base
                and self.c == other.c and self.poly == other.poly)

    def __hash__(self):
        return hash(("ExtFieldSpec", self.base, self.c, self.poly))

    def __repr__(self):
        return f"GF({self.base.order}^{self.c})"

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "c": self.c, "poly": list(self.poly)}


class FieldElement:
    """An element of a FieldSpec or ExtFieldSpec, identified by its index."""

    __slots__ = ("field", "index")

    def __init__(self, field, index: int):
        self.field = field
        self.index = index

    def _check(self, other):
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise ValueError("field elements from mismatched specs")

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.add_idx(self.index, other.index))

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.sub_idx(self.index, other.index))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg_idx(self.index))

    def __mul__(self, other):
        if isinstance(other, FieldVector):
            return NotImplemented  # handled by FieldVector.__rmul__
        self._check(other)
        return FieldElement(self.field, self.field.mul_idx(self.index, other.index))

    def __truediv__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.mul_idx(
            self.index, self.field.inv_idx(other.index)))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv_idx(self.index))

    def trace(self) -> "FieldElement":
        """Absolute trace down to the prime field."""
        if not isinstance(self.field, FieldSpec):
            raise ValueError("trace is defined on FieldSpec elements")
        return FieldElement(self.field.prime_subfield(), self.field.trace_idx(self.index))

    @property
    def coeffs(self) -> tuple:
        return self.field.index_to_coeffs(self.index)

    def is_zero(self) -> bool:
        return self.index == 0

    def __eq__(self, other):
        return (isinstance(other, FieldElement) and self.field == other.field
                and self.index == other.index)

    def __hash__(self):
        return hash((self.index, self.field))

    def __int__(self):
        return self.index

    def __repr__(self):
        return f"{self.field!r}:{self.index}"

    def to_json(self) -> list:
        # little-endian coefficient list
        return list(self.coeffs)


class FieldVector:
    """Fixed-length vector over one field, with componentwise arithmetic."""

    __slots__ = ("field", "elems")

    def __init__(self, field, elems: tuple):
        self.field = field
        self.elems = tuple(elems)
        for e in self.elems:
            if e.field != field:
                raise ValueError("vector entries from mismatched specs")

    def _check(self, other):
        if not isinstance(other, FieldVector) or other.field != self.field \
                or len(other) != len(self):
            raise ValueError("vectors from mismatched specs or lengths")

    def __add__(self, other):
        self._check(other)
        return FieldVector(self.field, tuple(a + b for a, b in zip(self.elems, other.elems)))

    def __sub__(self, other):
        self._check(other)
        return FieldVector(self.field, tuple(a - b for a, b in zip(self.elems, other.elems)))

    def __neg__(self):
        return FieldVector(self.field, tuple(-a for a in self.elems))

    def __mul__(self, other):
        """Componentwise product with another vector, or scaling by an element."""
        if isinstance(other, FieldVector):
            self._check(other)
            return FieldVector(self.field, tuple(
                a * b for a, b in zip(self.elems, other.elems)))
        if isinstance(other, FieldElement):
            return FieldVector(self.field, tuple(a * other for a in self.elems))
        raise TypeError("cannot multiply FieldVector by this operand")

    def __rmul__(self, other):
        if isinstance(other, FieldElement):
            return self.__mul__(other)
        raise TypeError("cannot multiply FieldVector by this operand")

    def dot(self, other) -> FieldElement:
        self._check(other)
        acc = self.field.zero
        for a, b in zip(self.elems, other.elems):
            acc = acc + a * b
        return acc

    def is_zero(self) -> bool:
        return all(e.index == 0 for e in self.elems)

    def indices(self) -> tuple:
        return tuple(e.index for e in self.elems)

    def __len__(self):
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __getitem__(self, i):
        return self.elems[i]

    def __eq__(self, other):
        return (isinstance(other, FieldVector) and self.field == other.field
                and self.elems == other.elems)

    def __hash__(self):
        return hash((self.field, self.elems))

    def __repr__(self):
        return f"vec{self.indices()}"

    def to_json(self) -> list:
        return [e.to_json() for e in self.elems]


def vector_from_indices(field, indices: Sequence[int]) -> FieldVector:
    return FieldVector(field, tuple(FieldElement(field, i) for i in indices))


def all_vectors(field, length: int) -> Iterator[FieldVector]:
    """All q^length vectors over field, in index order."""
    for idxs in itertools.product(range(field.order), repeat=length):
        yield vector_from_indices(field, idxs)


class LinearMap:
    """An F_q-linear map on F_q^c given by a square coefficient matrix."""

    def __init__(self, field, rows: Sequence[Sequence]):
        self.field = field
        self.rows = tuple(field.vector(r) for r in rows)
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")

    @classmethod
    def identity(cls, field, c: int) -> "LinearMap":
        return cls(field, [[1 if i == j else 0 for j in range(c)] for i in range(c)])

    @classmethod
    def coordinate_swap(cls, field, c: int) -> "LinearMap":
        """Reverse the coordinate order (a nontrivial invertible map for c >= 2)."""
        return cls(field, [[1 if j == c - 1 - i else 0 for j in range(c)]
                           for i in range(c)])

    @property
    def size(self) -> int:
        return len(self.rows)

    def apply(self, vec: FieldVector) -> FieldVector:
        if vec.field != self.field or len(vec) != self.size:
            raise ValueError("vector does not match the map")
        return FieldVector(self.field, tuple(r.dot(vec) for r in self.rows))

    def is_invertible(self) -> bool:
        # Gaussian elimination over the field; tiny matrices only.
        m = [[e for e in row] for row in self.rows]
        n = self.size
        for col in range(n):
            pivot = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
            if pivot is None:
                return False
            m[col], m[pivot] = m[pivot], m[col]
            inv = m[col][col].inverse()
            m[col] = [e * inv for e in m[col]]
            for r in range(n):
                if r != col and not m[r][col].is_zero():
                    factor = m[r][col]
                    m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
        return True

    def __eq__(self, other):
        return (isinstance(other, LinearMap) and self.field == other.field
                and self.rows == other.rows)

    def to_json(self) -> list:
        return [[e.index for e in row] for row in self.rows]
