"""The ternary operation induced by an encoder, and checks on its truth table.

phi(a, b, c) averages the three feature vectors and returns the class whose
center is nearer. Tables are 4x4x4 integer arrays indexed by element ids.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguityError, ExtractionError
from .nn import Network
from .task import CLASS_A, CLASS_B, CLASS_LABELS, DomainElement, element, full_domain

N_ELEMENTS = 4
TIE_TOLERANCE = 1e-9
MIN_CENTER_SEPARATION = 1e-6
PERMUTATIONS = tuple(itertools.permutations(range(3)))


def _features(source) -> np.ndarray:
    if isinstance(source, Network):
        from .trainer import encode

        return encode(source)
    f = np.asarray(source, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != N_ELEMENTS:
        raise ExtractionError(f"expected features for 4 elements, got shape {f.shape}")
    return f


def _eid(x) -> int:
    return x.id if isinstance(x, DomainElement) else element(x).id


@dataclass(frozen=True)
class ClassCenters:
    center_a: np.ndarray
    center_b: np.ndarray

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.center_a - self.center_b))


def class_centers(source) -> ClassCenters:
    """Per-class feature means, using the ground-truth labels of all four elements."""
    f = _features(source)
    labels = np.array(CLASS_LABELS)
    centers = ClassCenters(f[labels == CLASS_A].mean(axis=0), f[labels == CLASS_B].mean(axis=0))
    if centers.separation < MIN_CENTER_SEPARATION:
        raise ExtractionError(f"class centers coincide (separation {centers.separation:.3g})")
    return centers


def nearest_class(mean: np.ndarray, centers: ClassCenters) -> int:
    da = float(np.linalg.norm(mean - centers.center_a))
    db = float(np.linalg.norm(mean - centers.center_b))
    if abs(da - db) <= TIE_TOLERANCE:
        raise AmbiguityError(f"mean feature equidistant from both centers ({da:.12g})")
    return CLASS_A if da < db else CLASS_B


def phi(source, centers: ClassCenters | None, a, b, c) -> int:
    f = _features(source)
    centers = centers or class_centers(f)
    ids = [_eid(a), _eid(b), _eid(c)]
    try:
        return nearest_class(f[ids].mean(axis=0), centers)
    except AmbiguityError as exc:
        raise AmbiguityError(f"phi{tuple(ids)}: {exc}") from exc


@dataclass(frozen=True)
class TruthTable:
    entries: np.ndarray  # (4, 4, 4) of class bits

    def __post_init__(self):
        t = np.array(self.entries, dtype=np.int64)
        if t.shape != (N_ELEMENTS,) * 3 or not np.isin(t, (0, 1)).all():
            raise ExtractionError("a truth table is a total 4x4x4 map into {0, 1}")
        t.setflags(write=False)
        object.__setattr__(self, "entries", t)

    def __getitem__(self, triple) -> int:
        return int(self.entries[tuple(triple)])

    def __eq__(self, other):
        return isinstance(other, TruthTable) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def triples(self):
        return itertools.product(range(N_ELEMENTS), repeat=3)

    def with_entry(self, triple, value: int) -> TruthTable:
        t = self.entries.copy()
        t[tuple(triple)] = value
        return TruthTable(t)


def truth_table(source) -> TruthTable:
    f = _features(source)
    centers = class_centers(f)
    t = np.zeros((N_ELEMENTS,) * 3, dtype=np.int64)
    for triple in itertools.product(range(N_ELEMENTS), repeat=3):
        t[triple] = phi(f, centers, *triple)
    return TruthTable(t)


def majority_of_classes_table() -> TruthTable:
    """Reference table: the class held by at least two of the three inputs."""
    t = np.zeros((N_ELEMENTS,) * 3, dtype=np.int64)
    for a, b, c in itertools.product(range(N_ELEMENTS), repeat=3):
        t[a, b, c] = int(CLASS_LABELS[a] + CLASS_LABELS[b] + CLASS_LABELS[c] >= 2)
    return TruthTable(t)


@dataclass(frozen=True)
class PatternRow:
    pattern: tuple[int, int, int]
    count_class0: int
    count_class1: int
    majority: int


def pattern_summary(table: TruthTable) -> list[PatternRow]:
    """Outputs grouped by the class pattern of the inputs; 8 rows of 8 triples each."""
    rows = []
    for pattern in itertools.product((0, 1), repeat=3):
        reps = [[e for e in range(N_ELEMENTS) if CLASS_LABELS[e] == k] for k in pattern]
        values = [table[t] for t in itertools.product(*reps)]
        rows.append(PatternRow(pattern, values.count(0), values.count(1), int(sum(pattern) >= 2)))
    return rows


@dataclass
class PropertyReport:
    name: str
    checked: int
    violations: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "checked": self.checked,
            "violations": [list(map(_jsonable, v)) for v in self.violations],
        }


def _jsonable(x):
    return list(x) if isinstance(x, tuple) else x


def check_symmetry(table: TruthTable) -> PropertyReport:
    """phi(a,b,c) == phi(sigma(a,b,c)) for all 64 triples and 6 permutations."""
    report = PropertyReport("symmetry", 0)
    for triple in table.triples():
        for perm in PERMUTATIONS:
            permuted = tuple(triple[i] for i in perm)
            report.checked += 1
            if table[permuted] != table[triple]:
                report.violations.append((triple, perm))
    return report


def check_idempotence(table: TruthTable) -> PropertyReport:
    report = PropertyReport("idempotence", N_ELEMENTS)
    for x in range(N_ELEMENTS):
        if table[x, x, x] != CLASS_LABELS[x]:
            report.violations.append(((x, x, x), table[x, x, x]))
    return report


def check_majority_axiom(table: TruthTable) -> PropertyReport:
    """phi(a,a,b) = phi(a,b,a) = phi(b,a,a) = C(a) for every pair (a, b).

    16 pairs in 3 positions: 48 checks covering the 40 triples that repeat
    an element.
    """
    report = PropertyReport("majority", 0)
    for a, b in itertools.product(range(N_ELEMENTS), repeat=2):
        for triple in ((a, a, b), (a, b, a), (b, a, a)):
            report.checked += 1
            if table[triple] != CLASS_LABELS[a]:
                report.violations.append((triple, table[triple]))
    return report


@dataclass
class AssociativityReport:
    checked: int = 0
    dependent: list = field(default_factory=list)  # quintuples whose outer class depends on the representative
    violations: list = field(default_factory=list)  # quintuples where left and right nestings differ

    @property
    def representative_independent(self) -> bool:
        return not self.dependent

    @property
    def violation_count(self) -> int:
        return len(self.violations)

    def to_dict(self, max_witnesses: int = 16) -> dict:
        return {
            "checked": self.checked,
            "representative_independence": self.representative_independent,
            "representative_dependent_count": len(self.dependent),
            "associativity_violations": self.violation_count,
            "witnesses": [list(q) for q in self.violations[:max_witnesses]],
        }


def check_class_associativity(table: TruthTable, features=None) -> AssociativityReport:
    """Compare phi(phi(a,b,c),d,e) with phi(a,phi(b,c,d),e) at class level.

    The inner result is a class, so it is re-entered through every element of
    that class and, when `features` are given, through the class center too.
    A quintuple is representative-dependent when those choices disagree; it
    is a violation when the left and right nestings give different classes.
    """
    members = {k: [e for e in range(N_ELEMENTS) if CLASS_LABELS[e] == k] for k in (0, 1)}
    if features is not None:
        f = _features(features)
        centers = class_centers(f)
        center_of = {CLASS_A: centers.center_a, CLASS_B: centers.center_b}

        def outer(rep_class, x, y, rep_pos):
            vals = set()
            for r in members[rep_class]:
                args = [x, y]
                args.insert(rep_pos, r)
                vals.add(table[args])
            vecs = [f[x], f[y]]
            vecs.insert(rep_pos, center_of[rep_class])
            vals.add(nearest_class(np.mean(vecs, axis=0), centers))
            return vals
    else:

        def outer(rep_class, x, y, rep_pos):
            vals = set()
            for r in members[rep_class]:
                args = [x, y]
                args.insert(rep_pos, r)
                vals.add(table[args])
            return vals

    report = AssociativityReport()
    for a, b, c, d, e in itertools.product(range(N_ELEMENTS), repeat=5):
        report.checked += 1
        left = outer(table[a, b, c], d, e, 0)
        right = outer(table[b, c, d], a, e, 1)
        if len(left) > 1 or len(right) > 1:
            report.dependent.append((a, b, c, d, e))
        if left != right:
            report.violations.append((a, b, c, d, e))
    return report


def class_quotient(table: TruthTable) -> np.ndarray:
    """The induced 2x2x2 operation on classes; raises if it is not well defined."""
    q = -np.ones((2, 2, 2), dtype=np.int64)
    for triple in table.triples():
        key = tuple(CLASS_LABELS[x] for x in triple)
        if q[key] == -1:
            q[key] = table[triple]
        elif q[key] != table[triple]:
            raise ExtractionError(f"table is not constant on class pattern {key}")
    return q


def property_report(table: TruthTable, features=None) -> dict:
    assoc = check_class_associativity(table, features)
    sym, idem, maj = check_symmetry(table), check_idempotence(table), check_majority_axiom(table)
    return {
        "symmetry": sym.to_dict(),
        "idempotence": idem.to_dict(),
        "majority": maj.to_dict(),
        "representative_independence": assoc.representative_independent,
        "associativity_violations": assoc.violation_count,
        "associativity_checked": assoc.checked,
        "witnesses": [list(q) for q in assoc.violations[:16]],
        "core_properties_hold": sym.holds and idem.holds and maj.holds,
    }


CSV_HEADER = ("a", "b", "c", "phi_class")


def export_table(table: TruthTable, path) -> None:
    names = [e.display_name for e in full_domain()]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for a, b, c in table.triples():
            w.writerow((names[a], names[b], names[c], table[a, b, c]))


def import_table(path) -> TruthTable:
    t = -np.ones((N_ELEMENTS,) * 3, dtype=np.int64)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ExtractionError(f"{path}: expected header {','.join(CSV_HEADER)}")
            for row in reader:
                key = tuple(element(row[k]).id for k in "abc")
                t[key] = int(row["phi_class"])
    except (KeyError, ValueError) as exc:
        raise ExtractionError(f"{path}: malformed truth table ({exc})") from exc
    if (t < 0).any():
        raise ExtractionError(f"{path}: table is missing entries")
    return TruthTable(t)

