"""Logic-loss training, the prototype classifier and the supervised baseline."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import nn
from .errors import ConfigError, TrainingError, UsageError
from .nn import Activation, Network
from .task import CLASS_A, CLASS_B, DOMAIN_INPUTS, DomainElement, split

log = logging.getLogger(__name__)

ENCODER_DIMS = (2, 16, 16, 8)
BASELINE_DIMS = (2, 16, 16, 2)
HIDDEN_ACTS = (Activation.RELU, Activation.RELU, Activation.IDENTITY)

SAME_PAIRS = ((0, 1), (2, 3))
CROSS_PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))

# seed offset for the "no prototype" linear head so it does not reuse the encoder's stream
HEAD_SEED_OFFSET = 1_000_003


def _cosine(base: float, epoch: int, epochs: int) -> float:
    # anneals to 0 at the last step; lets Adam settle on the non-smooth norm terms
    return base * 0.5 * (1.0 + math.cos(math.pi * epoch / epochs))


SCHEDULES = {
    "cosine": _cosine,
    "constant": lambda base, epoch, epochs: base,
}


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 1000
    margin: float = 2.0
    learning_rate: float = 1e-2
    prototype_threshold: float | None = None  # None -> margin / 2
    schedule: str = "cosine"  # or "constant"

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"unknown schedule {self.schedule!r}, expected one of {sorted(SCHEDULES)}")
        if int(self.epochs) < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not self.margin > 0:
            raise ConfigError(f"margin must be positive, got {self.margin}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.prototype_threshold is not None and not self.prototype_threshold > 0:
            raise ConfigError(f"prototype_threshold must be positive, got {self.prototype_threshold}")

    def lr_at(self, epoch: int) -> float:
        return SCHEDULES[self.schedule](self.learning_rate, epoch, self.epochs)

    @property
    def threshold(self) -> float:
        return self.margin / 2 if self.prototype_threshold is None else self.prototype_threshold

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "epochs": self.epochs,
            "margin": self.margin,
            "learning_rate": self.learning_rate,
            "prototype_threshold": self.threshold,
            "schedule": self.schedule,
        }


@dataclass
class TrainResult:
    network: Network
    final_loss: float
    losses: list[float] = field(repr=False, default_factory=list)


def _pair_distance_grad(diff: np.ndarray) -> tuple[float, np.ndarray]:
    d = float(np.linalg.norm(diff))
    # subgradient 0 at coincident points
    return d, (diff / d if d > 0.0 else np.zeros_like(diff))


def logic_loss_and_grad(features, margin: float = 2.0) -> tuple[float, np.ndarray]:
    """Six-term contrastive loss over features in e0..e3 order, with its gradient.

    Same-class pairs contribute their distance, cross-class pairs a hinge
    max(0, margin - distance); the sum is divided by 6.
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != 4:
        raise ConfigError(f"expected 4 feature vectors, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise TrainingError("non-finite feature vector")
    total = 0.0
    grad = np.zeros_like(f)
    for i, j in SAME_PAIRS:
        d, u = _pair_distance_grad(f[i] - f[j])
        total += d
        grad[i] += u
        grad[j] -= u
    for i, j in CROSS_PAIRS:
        d, u = _pair_distance_grad(f[i] - f[j])
        if margin - d > 0.0:
            total += margin - d
            grad[i] -= u
            grad[j] += u
    return total / 6.0, grad / 6.0


def logic_loss(features, margin: float = 2.0) -> float:
    return logic_loss_and_grad(features, margin)[0]


def train_logic(cfg: TrainConfig) -> TrainResult:
    """Full-batch Adam on the logic loss over the four canonical inputs."""
    net = nn.init_network(cfg.seed, ENCODER_DIMS, HIDDEN_ACTS)
    state = nn.OptimizerState.for_network(net, cfg.learning_rate)
    losses = []
    for epoch in range(cfg.epochs):
        out, trace = nn.forward(net, DOMAIN_INPUTS)
        try:
            loss, g = logic_loss_and_grad(out, cfg.margin)
        except TrainingError as exc:
            raise TrainingError(f"diverged at epoch {epoch}: {exc}") from exc
        losses.append(loss)
        net, state = nn.step(state, net, nn.backward(net, trace, g), cfg.lr_at(epoch))
    final = logic_loss(nn.forward(net, DOMAIN_INPUTS)[0], cfg.margin)
    if not np.isfinite(final):
        raise TrainingError(f"diverged at epoch {cfg.epochs}")
    log.info("logic training seed=%d final loss %.6g", cfg.seed, final)
    return TrainResult(net, final, losses)


def encode(encoder: Network, elements: Sequence[DomainElement] | None = None) -> np.ndarray:
    """Feature rows for `elements` (default: the whole domain in id order)."""
    x = DOMAIN_INPUTS if elements is None else np.array([e.bits for e in elements])
    return nn.forward(encoder, x)[0]


@dataclass(frozen=True)
class PrototypeClassifier:
    encoder: Network
    prototype_a: np.ndarray
    threshold: float

    def distance(self, element: DomainElement) -> float:
        return float(np.linalg.norm(encode(self.encoder, [element])[0] - self.prototype_a))

    def __call__(self, element: DomainElement) -> int:
        return classify(self, element)


def build_prototype(encoder: Network, threshold: float) -> PrototypeClassifier:
    if not threshold > 0:
        raise ConfigError(f"threshold must be positive, got {threshold}")
    train, _ = split()
    return PrototypeClassifier(encoder, encode(encoder, train).mean(axis=0), float(threshold))


def classify(clf: PrototypeClassifier, element: DomainElement) -> int:
    return CLASS_B if clf.distance(element) > clf.threshold else CLASS_A


def softmax_xent_and_grad(logits: np.ndarray, targets: Sequence[int]) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over rows of `logits`."""
    z = logits - logits.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    n = len(targets)
    idx = np.arange(n), np.asarray(targets)
    loss = float(-np.mean(np.log(p[idx])))
    grad = p.copy()
    grad[idx] -= 1.0
    return loss, grad / n


def _fit_classifier(net: Network, x: np.ndarray, targets, cfg: TrainConfig, what: str) -> TrainResult:
    state = nn.OptimizerState.for_network(net, cfg.learning_rate)
    losses = []
    for epoch in range(cfg.epochs):
        out, trace = nn.forward(net, x)
        loss, g = softmax_xent_and_grad(out, targets)
        if not np.isfinite(loss):
            raise TrainingError(f"{what} diverged at epoch {epoch}")
        losses.append(loss)
        net, state = nn.step(state, net, nn.backward(net, trace, g), cfg.lr_at(epoch))
    final = softmax_xent_and_grad(nn.forward(net, x)[0], targets)[0]
    return TrainResult(net, final, losses)


def train_baseline(cfg: TrainConfig) -> TrainResult:
    """2-16-16-2 softmax classifier trained only on the class-A split."""
    train, _ = split()
    net = nn.init_network(cfg.seed, BASELINE_DIMS, HIDDEN_ACTS)
    x = np.array([e.bits for e in train])
    return _fit_classifier(net, x, [e.class_label for e in train], cfg, "baseline")


def train_linear_head(encoder: Network, cfg: TrainConfig) -> TrainResult:
    """Linear 2-logit head on frozen encoder features, fit on class-A data only."""
    train, _ = split()
    head = nn.init_network(cfg.seed + HEAD_SEED_OFFSET, (encoder.out_dim, 2), (Activation.IDENTITY,))
    return _fit_classifier(head, encode(encoder, train), [e.class_label for e in train], cfg, "linear head")


def argmax_predictor(net: Network, encoder: Network | None = None) -> Callable[[DomainElement], int]:
    """Class predictor from logits; ties resolve to class A."""

    def predict(element: DomainElement) -> int:
        x = np.array(element.bits)
        if encoder is not None:
            x = nn.forward(encoder, x)[0]
        return int(np.argmax(nn.forward(net, x)[0]))

    return predict


def evaluate(predict: Callable[[DomainElement], int], elements: Sequence[DomainElement]) -> float:
    if not elements:
        raise UsageError("cannot evaluate on an empty element list")
    hits = sum(predict(e) == e.class_label for e in elements)
    return hits / len(elements)


def distance_matrix(encoder: Network) -> np.ndarray:
    f = encode(encoder)
    return np.linalg.norm(f[:, None, :] - f[None, :, :], axis=-1)
