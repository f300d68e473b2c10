"""Fixed-topology dense networks with exact reverse-mode gradients.

Everything is float64. The rectified-linear derivative at exactly zero is
taken as 0, which matters for bit-exact reproducibility: the input (0, 0)
hits that point on the first layer whenever biases start at zero.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, ShapeError, TrainingError

NETWORK_SCHEMA_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class Activation(str, enum.Enum):
    RELU = "relu"
    IDENTITY = "identity"


@dataclass(frozen=True)
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    biases: np.ndarray  # (out_dim,)
    activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        b = np.array(self.biases, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ShapeError(f"weights must be a non-empty matrix, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ShapeError(f"biases shape {b.shape} does not match out_dim {w.shape[0]}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ConfigError("layer parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Network:
    layers: tuple[DenseLayer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ConfigError("a network needs at least one layer")
        for i, (a, b) in enumerate(zip(layers, layers[1:])):
            if a.out_dim != b.in_dim:
                raise ShapeError(
                    f"layer {i} out_dim {a.out_dim} != layer {i + 1} in_dim {b.in_dim}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def dims(self) -> list[int]:
        return [self.in_dim] + [layer.out_dim for layer in self.layers]

    def parameters(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(layer.weights, layer.biases) for layer in self.layers]

    def with_parameters(self, params: Sequence[tuple[np.ndarray, np.ndarray]]) -> Network:
        if len(params) != len(self.layers):
            raise ShapeError("parameter list length does not match layer count")
        return Network(
            tuple(
                DenseLayer(w, b, layer.activation)
                for layer, (w, b) in zip(self.layers, params)
            )
        )

    def __call__(self, x) -> np.ndarray:
        return forward(self, x)[0]


@dataclass(frozen=True)
class Trace:
    """Per-layer inputs and pre-activations recorded by `forward`."""

    inputs: tuple[np.ndarray, ...]
    preacts: tuple[np.ndarray, ...]
    batched: bool


# a gradient is one (dW, db) pair per layer, same shapes as the parameters
Gradients = list[tuple[np.ndarray, np.ndarray]]


def init_network(seed: int, dims: Sequence[int], activations: Sequence[Activation | str]) -> Network:
    """Uniform(-1/sqrt(in_dim), 1/sqrt(in_dim)) weights, zero biases.

    Draws come from numpy's PCG64 generator seeded with `seed`, layer by
    layer in row-major order.
    """
    dims = list(dims)
    if len(dims) < 2:
        raise ConfigError(f"dims needs at least 2 entries, got {dims}")
    if any(int(d) < 1 for d in dims):
        raise ConfigError(f"all dims must be >= 1, got {dims}")
    if len(activations) != len(dims) - 1:
        raise ConfigError(
            f"expected {len(dims) - 1} activations, got {len(activations)}"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = []
    for d_in, d_out, act in zip(dims, dims[1:], activations):
        bound = 1.0 / np.sqrt(d_in)
        w = rng.uniform(-bound, bound, size=(d_out, d_in))
        layers.append(DenseLayer(w, np.zeros(d_out), Activation(act)))
    return Network(tuple(layers))


def _activate(z: np.ndarray, act: Activation) -> np.ndarray:
    if act is Activation.RELU:
        return np.maximum(z, 0.0)
    return z


def forward(net: Network, x) -> tuple[np.ndarray, Trace]:
    """Evaluate `net` on one input vector or a batch of row vectors."""
    a = np.asarray(x, dtype=np.float64)
    batched = a.ndim == 2
    if a.ndim not in (1, 2) or a.shape[-1] != net.in_dim:
        raise ShapeError(f"input shape {a.shape} incompatible with in_dim {net.in_dim}")
    a = np.atleast_2d(a)
    inputs, preacts = [], []
    for layer in net.layers:
        inputs.append(a)
        z = a @ layer.weights.T + layer.biases
        preacts.append(z)
        a = _activate(z, layer.activation)
    out = a if batched else a[0]
    return out, Trace(tuple(inputs), tuple(preacts), batched)


def backward(net: Network, trace: Trace, output_gradient) -> Gradients:
    """Reverse-mode gradients of <output_gradient, net(x)> w.r.t. all parameters.

    For a batched trace the gradients are summed over the batch.
    """
    g = np.asarray(output_gradient, dtype=np.float64)
    if len(trace.inputs) != len(net.layers):
        raise ShapeError("trace does not belong to this network")
    g = np.atleast_2d(g)
    if g.shape != trace.preacts[-1].shape or g.shape[1] != net.out_dim:
        raise ShapeError(
            f"output gradient shape {g.shape} does not match output {trace.preacts[-1].shape}"
        )
    grads: Gradients = [None] * len(net.layers)  # type: ignore[list-item]
    for i in reversed(range(len(net.layers))):
        layer = net.layers[i]
        a_in, z = trace.inputs[i], trace.preacts[i]
        if z.shape[1] != layer.out_dim or a_in.shape[1] != layer.in_dim:
            raise ShapeError(f"stale trace at layer {i}")
        if layer.activation is Activation.RELU:
            g = g * (z > 0.0)
        grads[i] = (g.T @ a_in, g.sum(axis=0))
        g = g @ layer.weights
    return grads


@dataclass
class OptimizerState:
    """Adaptive-moment (Adam) state; moments mirror the parameter shapes."""

    learning_rate: float = 1e-2
    first_moments: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    second_moments: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    step_count: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")

    @classmethod
    def for_network(cls, net: Network, learning_rate: float = 1e-2) -> OptimizerState:
        zeros = [(np.zeros_like(w), np.zeros_like(b)) for w, b in net.parameters()]
        return cls(learning_rate, zeros, [(w.copy(), b.copy()) for w, b in zeros], 0)


def _check_finite(grads: Gradients) -> None:
    for i, (dw, db) in enumerate(grads):
        for name, arr in (("weights", dw), ("biases", db)):
            bad = np.argwhere(~np.isfinite(arr))
            if bad.size:
                raise TrainingError(
                    f"non-finite gradient at layer {i} {name}{tuple(int(k) for k in bad[0])}"
                )


def step(
    state: OptimizerState, net: Network, grads: Gradients, lr: float | None = None
) -> tuple[Network, OptimizerState]:
    """One bias-corrected Adam update. Inputs are not modified.

    `lr` overrides the state's learning rate for this step only (schedules).
    """
    params = net.parameters()
    if len(grads) != len(params) or any(
        dw.shape != w.shape or db.shape != b.shape for (w, b), (dw, db) in zip(params, grads)
    ):
        raise ShapeError("gradient shapes do not match parameters")
    _check_finite(grads)
    if not state.first_moments:
        state = OptimizerState.for_network(net, state.learning_rate)

    lr = state.learning_rate if lr is None else lr
    t = state.step_count + 1
    c1 = 1.0 - ADAM_BETA1**t
    c2 = 1.0 - ADAM_BETA2**t
    new_params, new_m, new_v = [], [], []
    for (w, b), (dw, db), (mw, mb), (vw, vb) in zip(
        params, grads, state.first_moments, state.second_moments
    ):
        pair_p, pair_m, pair_v = [], [], []
        for p, g, m, v in ((w, dw, mw, vw), (b, db, mb, vb)):
            m = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * g
            v = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * g * g
            update = lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)
            pair_p.append(p - update)
            pair_m.append(m)
            pair_v.append(v)
        new_params.append(tuple(pair_p))
        new_m.append(tuple(pair_m))
        new_v.append(tuple(pair_v))
    return net.with_parameters(new_params), OptimizerState(state.learning_rate, new_m, new_v, t)


def network_to_dict(net: Network) -> dict:
    return {
        "schema_version": NETWORK_SCHEMA_VERSION,
        "dims": net.dims,
        "layers": [
            {
                "in_dim": layer.in_dim,
                "out_dim": layer.out_dim,
                "activation": layer.activation.value,
                "weights": layer.weights.ravel().tolist(),
                "biases": layer.biases.tolist(),
            }
            for layer in net.layers
        ],
    }


def network_from_dict(doc: dict) -> Network:
    try:
        version = doc["schema_version"]
        if version != NETWORK_SCHEMA_VERSION:
            raise ConfigError(f"unsupported network schema_version {version!r}")
        layers = []
        for spec in doc["layers"]:
            w = np.array(spec["weights"], dtype=np.float64).reshape(spec["out_dim"], spec["in_dim"])
            layers.append(DenseLayer(w, np.array(spec["biases"], dtype=np.float64), spec["activation"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed network document: {exc}") from exc
    return Network(tuple(layers))


def save_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1) + "\n")


def load_network(path) -> Network:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return network_from_dict(doc)
