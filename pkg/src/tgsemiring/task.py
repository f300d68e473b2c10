"""The four-element color/shape domain and its train/test split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CLASS_A = 0
CLASS_B = 1
CLASS_NAMES = {CLASS_A: "A", CLASS_B: "B"}


@dataclass(frozen=True)
class DomainElement:
    id: int
    color: int  # 0 red, 1 blue
    shape: int  # 0 square, 1 circle
    display_name: str

    @property
    def class_label(self) -> int:
        return self.color ^ self.shape

    @property
    def bits(self) -> tuple[float, float]:
        return (float(self.color), float(self.shape))


# id order e0..e3 matches the row order the logic loss pairs are written against
_DOMAIN = (
    DomainElement(0, 0, 0, "red square"),
    DomainElement(1, 1, 1, "blue circle"),
    DomainElement(2, 0, 1, "red circle"),
    DomainElement(3, 1, 0, "blue square"),
)

DOMAIN_INPUTS = np.array([e.bits for e in _DOMAIN], dtype=np.float64)
CLASS_LABELS = tuple(e.class_label for e in _DOMAIN)


def full_domain() -> list[DomainElement]:
    return list(_DOMAIN)


def split() -> tuple[list[DomainElement], list[DomainElement]]:
    """Train on the class-A elements only; test on the unseen class-B pair."""
    train = [e for e in _DOMAIN if e.class_label == CLASS_A]
    test = [e for e in _DOMAIN if e.class_label == CLASS_B]
    return train, test


def element(key: int | str) -> DomainElement:
    """Look an element up by id or display name."""
    for e in _DOMAIN:
        if key == e.id or key == e.display_name:
            return e
    raise KeyError(key)
