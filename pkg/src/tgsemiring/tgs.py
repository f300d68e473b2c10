"""Finite commutative ternary Gamma-semirings as explicit tables.

A structure is a carrier {0..n-1}, a zero, an n x n addition table and one
n x n x n table per gamma. Nothing about the axioms is assumed: every
property is checked exhaustively and reported with witnesses. At n <= 4
that is a few thousand table lookups, so all checks are vectorised numpy
comparisons over the full index grid.
"""

from __future__ import annotations

import enum
import functools
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, UsageError

STRUCTURE_SCHEMA_VERSION = 1
MAX_ENUMERATION_ORDER = 4
MAX_ISOMORPHISM_ORDER = 6


@dataclass(frozen=True, eq=False)
class FiniteTGS:
    n: int
    zero: int
    add: np.ndarray
    ternary: tuple[np.ndarray, ...]

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ConfigError("carrier must be non-empty")
        if not 0 <= self.zero < n:
            raise ConfigError(f"zero {self.zero} outside carrier of size {n}")
        add = np.array(self.add, dtype=np.int64)
        ternary = tuple(np.array(t, dtype=np.int64) for t in self.ternary)
        if add.shape != (n, n):
            raise ConfigError(f"add table must be {n}x{n}, got {add.shape}")
        if not ternary:
            raise ConfigError("at least one ternary operation (|Gamma| >= 1) is required")
        for g, t in enumerate(ternary):
            if t.shape != (n, n, n):
                raise ConfigError(f"ternary table {g} must be {n}x{n}x{n}, got {t.shape}")
        for arr in (add, *ternary):
            if arr.min() < 0 or arr.max() >= n:
                raise ConfigError("table entries must lie in the carrier (closure)")
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "zero", int(self.zero))
        object.__setattr__(self, "add", add)
        object.__setattr__(self, "ternary", ternary)

    @property
    def gamma_count(self) -> int:
        return len(self.ternary)

    @functools.cached_property
    def profile(self) -> AxiomProfile:
        return axiom_profile(self)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteTGS)
            and self.n == other.n
            and self.zero == other.zero
            and np.array_equal(self.add, other.add)
            and len(self.ternary) == len(other.ternary)
            and all(np.array_equal(a, b) for a, b in zip(self.ternary, other.ternary))
        )

    def __hash__(self):
        return hash((self.n, self.zero, self.add.tobytes(), tuple(t.tobytes() for t in self.ternary)))

    def replace(self, *, add=None, ternary=None, zero=None) -> FiniteTGS:
        return FiniteTGS(
            self.n,
            self.zero if zero is None else zero,
            self.add if add is None else add,
            self.ternary if ternary is None else tuple(ternary),
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": STRUCTURE_SCHEMA_VERSION,
            "n": self.n,
            "zero": self.zero,
            "add": self.add.ravel().tolist(),
            "gamma_count": self.gamma_count,
            "ternary": [t.ravel().tolist() for t in self.ternary],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> FiniteTGS:
        try:
            if doc.get("schema_version", STRUCTURE_SCHEMA_VERSION) != STRUCTURE_SCHEMA_VERSION:
                raise ConfigError(f"unsupported structure schema_version {doc['schema_version']!r}")
            n = int(doc["n"])
            ternary = [np.reshape(t, (n, n, n)) for t in doc["ternary"]]
            if "gamma_count" in doc and doc["gamma_count"] != len(ternary):
                raise ConfigError("gamma_count does not match the number of ternary tables")
            return cls(n, int(doc["zero"]), np.reshape(doc["add"], (n, n)), tuple(ternary))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed structure document: {exc}") from exc


def save_structure(s: FiniteTGS, path) -> None:
    Path(path).write_text(json.dumps(s.to_dict()) + "\n")


def load_structure(path) -> FiniteTGS:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return FiniteTGS.from_dict(doc)


@dataclass
class CheckResult:
    holds: bool
    witnesses: list = field(default_factory=list)

    def __bool__(self):
        return self.holds


def _result(mask: np.ndarray, label=None, limit: int | None = None) -> CheckResult:
    """`mask` marks failing index tuples; `label` turns one into a witness."""
    bad = np.argwhere(mask)
    if limit is not None:
        bad = bad[:limit]
    label = label or (lambda idx: idx)
    return CheckResult(not mask.any(), [label(tuple(int(i) for i in idx)) for idx in bad])


@dataclass
class MonoidReport:
    commutative: CheckResult
    associative: CheckResult
    identity: CheckResult

    def __iter__(self):
        return iter((self.commutative, self.associative, self.identity))


def check_additive_monoid(s: FiniteTGS) -> MonoidReport:
    A = s.add
    r = np.arange(s.n)
    comm = A != A.T
    # (a+b)+c vs a+(b+c) over the full n^3 grid
    assoc = A[A[:, :, None], r[None, None, :]] != A[r[:, None, None], A[None, :, :]]
    ident = (A[s.zero, :] != r) | (A[:, s.zero] != r)
    return MonoidReport(
        _result(comm, lambda i: {"a": i[0], "b": i[1], "a+b": int(A[i]), "b+a": int(A[i[::-1]])}),
        _result(assoc, lambda i: {"a": i[0], "b": i[1], "c": i[2]}),
        _result(ident, lambda i: {"a": i[0]}),
    )


def check_distributivity(s: FiniteTGS) -> CheckResult:
    """{a+b,c,d} = {a,c,d} + {b,c,d}, and likewise in the 2nd and 3rd slots."""
    A = s.add
    a, b, c, d = np.ix_(*(np.arange(s.n),) * 4)
    witnesses = []
    holds = True
    for g, T in enumerate(s.ternary):
        cases = (
            (T[A[a, b], c, d], A[T[a, c, d], T[b, c, d]]),
            (T[c, A[a, b], d], A[T[c, a, d], T[c, b, d]]),
            (T[c, d, A[a, b]], A[T[c, d, a], T[c, d, b]]),
        )
        for pos, (lhs, rhs) in enumerate(cases):
            lhs, rhs = np.broadcast_arrays(lhs, rhs)
            res = _result(
                lhs != rhs,
                lambda i, g=g, pos=pos: {"gamma": g, "slot": pos, "a": i[0], "b": i[1], "c": i[2], "d": i[3]},
            )
            holds &= res.holds
            witnesses += res.witnesses
    return CheckResult(holds, witnesses)


def check_zero_absorption(s: FiniteTGS) -> CheckResult:
    z = s.zero
    witnesses = []
    for g, T in enumerate(s.ternary):
        for pos, sl in enumerate((T[z, :, :], T[:, z, :], T[:, :, z])):
            def label(i, g=g, pos=pos):
                args = list(i)
                args.insert(pos, z)
                return {"gamma": g, "args": args, "value": int(T[tuple(args)])}

            witnesses += _result(sl != z, label).witnesses
    return CheckResult(not witnesses, witnesses)


def check_ternary_commutativity(s: FiniteTGS) -> CheckResult:
    witnesses = []
    for g, T in enumerate(s.ternary):
        for perm in itertools.permutations(range(3)):
            if perm == (0, 1, 2):
                continue
            mask = T != np.transpose(T, perm)
            witnesses += _result(mask, lambda i, g=g, perm=perm: {"gamma": g, "args": list(i), "perm": list(perm)}).witnesses
    return CheckResult(not witnesses, witnesses)


def check_idempotence(s: FiniteTGS) -> CheckResult:
    r = np.arange(s.n)
    witnesses = []
    for g, T in enumerate(s.ternary):
        witnesses += _result(T[r, r, r] != r, lambda i, g=g: {"gamma": g, "a": i[0]}).witnesses
    return CheckResult(not witnesses, witnesses)


def check_majority(s: FiniteTGS) -> CheckResult:
    """{a,a,b} = {a,b,a} = {b,a,a} = a for all a, b."""
    a, b = np.ix_(np.arange(s.n), np.arange(s.n))
    witnesses = []
    for g, T in enumerate(s.ternary):
        for pos, vals in enumerate((T[a, a, b], T[a, b, a], T[b, a, a])):
            def label(i, g=g, pos=pos):
                x, y = i
                args = [(x, x, y), (x, y, x), (y, x, x)][pos]
                return {"gamma": g, "args": list(args), "value": int(T[args]), "expected": x}

            witnesses += _result(vals != a, label).witnesses
    return CheckResult(not witnesses, witnesses)


def ternary_associativity_violations(s: FiniteTGS, gamma: int = 0) -> int:
    """Count of (a,b,c,d,e) with {{a,b,c},d,e} != {a,{b,c,d},e}."""
    T = s.ternary[gamma]
    a, b, c, d, e = np.ix_(*(np.arange(s.n),) * 5)
    left = T[T[a, b, c], d, e]
    right = T[a, T[b, c, d], e]
    return int(np.count_nonzero(left != right))


@dataclass(frozen=True)
class AxiomProfile:
    add_commutative: bool
    add_associative: bool
    zero_identity: bool
    distributive: bool
    zero_absorbing: bool
    ternary_symmetric: bool
    idempotent: bool
    majority: bool

    @property
    def is_ternary_gamma_semiring(self) -> bool:
        """All five defining axioms: additive monoid, distributivity, absorption, symmetry."""
        return all(
            (self.add_commutative, self.add_associative, self.zero_identity,
             self.distributive, self.zero_absorbing, self.ternary_symmetric)
        )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def axiom_profile(s: FiniteTGS) -> AxiomProfile:
    mon = check_additive_monoid(s)
    return AxiomProfile(
        add_commutative=mon.commutative.holds,
        add_associative=mon.associative.holds,
        zero_identity=mon.identity.holds,
        distributive=check_distributivity(s).holds,
        zero_absorbing=check_zero_absorption(s).holds,
        ternary_symmetric=check_ternary_commutativity(s).holds,
        idempotent=check_idempotence(s).holds,
        majority=check_majority(s).holds,
    )


class StructureType(str, enum.Enum):
    BOOLEAN = "BooleanType"
    OTHER = "Other"


def classify_type(p: AxiomProfile) -> StructureType:
    """Boolean type = symmetric, idempotent and majority-satisfying (the majority-gate cluster)."""
    if p.idempotent and p.majority and p.ternary_symmetric:
        return StructureType.BOOLEAN
    return StructureType.OTHER


def _bitwise_majority(a, b, c):
    return (a & b) | (a & c) | (b & c)


def canonical_boolean_4() -> FiniteTGS:
    """{0,1}^2 coded as 0b00..0b11, zero 00, componentwise OR and componentwise majority."""
    r = np.arange(4)
    a, b, c = np.ix_(r, r, r)
    s = FiniteTGS(4, 0, r[:, None] | r[None, :], (_bitwise_majority(a, b, c),))
    s.profile  # noqa: B018 - computed eagerly so the structure ships with its profile
    return s


def boolean_majority(n_bits: int = 1) -> np.ndarray:
    r = np.arange(2**n_bits)
    return _bitwise_majority(*np.ix_(r, r, r))


def relabel(s: FiniteTGS, perm: Sequence[int]) -> FiniteTGS:
    """The isomorphic copy of `s` obtained by renaming element x to perm[x]."""
    p = np.asarray(perm, dtype=np.int64)
    if sorted(p.tolist()) != list(range(s.n)):
        raise UsageError(f"{list(perm)} is not a permutation of the carrier")
    inv = np.argsort(p)
    add = p[s.add[np.ix_(inv, inv)]]
    ternary = tuple(p[T[np.ix_(inv, inv, inv)]] for T in s.ternary)
    return FiniteTGS(s.n, int(p[s.zero]), add, ternary)


def _transports(s1: FiniteTGS, s2: FiniteTGS, p: np.ndarray) -> bool:
    if not np.array_equal(p[s1.add], s2.add[np.ix_(p, p)]):
        return False
    return all(
        np.array_equal(p[T1], T2[np.ix_(p, p, p)]) for T1, T2 in zip(s1.ternary, s2.ternary)
    )


def _zero_fixing_perms(n: int, z1: int, z2: int):
    rest1 = [x for x in range(n) if x != z1]
    rest2 = [x for x in range(n) if x != z2]
    for images in itertools.permutations(rest2):
        p = np.empty(n, dtype=np.int64)
        p[z1] = z2
        p[rest1] = images
        yield p


def isomorphic(s1: FiniteTGS, s2: FiniteTGS) -> tuple[bool, list[int] | None]:
    """Search zero-preserving bijections that carry every table of s1 onto s2."""
    if s1.n != s2.n or s1.gamma_count != s2.gamma_count:
        raise UsageError("structures differ in carrier size or |Gamma|")
    if s1.n > MAX_ISOMORPHISM_ORDER:
        raise UsageError(f"isomorphism search limited to n <= {MAX_ISOMORPHISM_ORDER}")
    for p in _zero_fixing_perms(s1.n, s1.zero, s2.zero):
        if _transports(s1, s2, p):
            return True, p.tolist()
    return False, None


def _check_order(n: int) -> None:
    if not 1 <= n <= MAX_ENUMERATION_ORDER:
        raise UsageError(f"enumeration supports 1 <= n <= {MAX_ENUMERATION_ORDER}, got {n}")


def enumerate_majority_ternary(n: int) -> list[np.ndarray]:
    """All symmetric, idempotent, majority-satisfying ternary tables on n elements.

    Any triple with a repeated element is forced to that element, so only the
    C(n,3) sets of three distinct elements are free. Output is in
    lexicographic order of the flattened tables.
    """
    _check_order(n)
    free = list(itertools.combinations(range(n), 3))
    base = np.empty((n, n, n), dtype=np.int64)
    for a, b, c in itertools.product(range(n), repeat=3):
        base[a, b, c] = a if a in (b, c) else b if b == c else -1
    tables = []
    for values in itertools.product(range(n), repeat=len(free)):
        t = base.copy()
        for triple, v in zip(free, values):
            for perm in itertools.permutations(triple):
                t[perm] = v
        tables.append(t)
    return tables


def join_semilattice_add(n: int) -> np.ndarray:
    """Componentwise OR on bit-coded elements; the canonical addition for n = 2, 4."""
    r = np.arange(n)
    add = r[:, None] | r[None, :]
    if add.max() >= n:
        raise UsageError(f"bitwise OR is not closed on {{0..{n - 1}}}")
    return add


FILTERS = {
    "symmetric+idempotent+majority": (),
    "+distributive": ("distributive",),
    "+zero_absorbing": ("zero_absorbing",),
    "+distributive+zero_absorbing": ("distributive", "zero_absorbing"),
}


def _canonical_key(s: FiniteTGS, autos: list[np.ndarray]) -> bytes:
    """Smallest relabelled ternary table over additive automorphisms fixing zero."""
    T = s.ternary[0]
    return min(p[T[np.ix_(np.argsort(p), np.argsort(p), np.argsort(p))]].tobytes() for p in autos)


def iso_partition(structures: Sequence[FiniteTGS]) -> list[list[int]]:
    """Group indices into isomorphism classes (structures share one add table and zero)."""
    if not structures:
        return []
    ref = structures[0]
    autos = [
        p for p in _zero_fixing_perms(ref.n, ref.zero, ref.zero)
        if np.array_equal(p[ref.add], ref.add[np.ix_(p, p)])
    ]
    classes: dict[bytes, list[int]] = {}
    for i, s in enumerate(structures):
        if s.zero != ref.zero or not np.array_equal(s.add, ref.add):
            raise UsageError("iso_partition expects a common addition table and zero")
        classes.setdefault(_canonical_key(s, autos), []).append(i)
    return sorted(classes.values())


def uniqueness_report(n: int = 4) -> dict:
    """Iso-class counts of majority ternary operations under each axiom subset.

    Every candidate from `enumerate_majority_ternary(n)` is paired with the
    bitwise-OR addition (zero 0) and tagged with its distributivity and
    zero-absorption flags and its element-level associativity violation count.
    """
    _check_order(n)
    add = join_semilattice_add(n)
    tables = enumerate_majority_ternary(n)
    structures = [FiniteTGS(n, 0, add, (t,)) for t in tables]
    flags = [
        {
            "distributive": check_distributivity(s).holds,
            "zero_absorbing": check_zero_absorption(s).holds,
            "associativity_violations": ternary_associativity_violations(s),
        }
        for s in structures
    ]
    # componentwise majority exists only where the carrier is {0,1}^k
    canonical = FiniteTGS(n, 0, add, (boolean_majority(n.bit_length() - 1),)) if n in (1, 2, 4) else None
    canonical_index = next(
        (i for i, s in enumerate(structures) if canonical is not None and s == canonical), None
    )
    report = {
        "schema_version": STRUCTURE_SCHEMA_VERSION,
        "n": n,
        "candidates": len(structures),
        "canonical_index": canonical_index,
        "filters": {},
    }
    for name, required in FILTERS.items():
        survivors = [i for i in range(len(structures)) if all(flags[i][k] for k in required)]
        classes = [[survivors[j] for j in cls] for cls in iso_partition([structures[i] for i in survivors])]
        report["filters"][name] = {
            "survivors": len(survivors),
            "iso_classes": len(classes),
            "class_sizes": [len(c) for c in classes],
            "canonical_present": canonical_index is not None and any(canonical_index in c for c in classes),
            "representatives": [
                {
                    "index": c[0],
                    "ternary": tables[c[0]].ravel().tolist(),
                    **flags[c[0]],
                }
                for c in classes
            ],
        }
    return report
