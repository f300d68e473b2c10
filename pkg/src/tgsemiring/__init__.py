"""Compositional generalization on the XOR color/shape task and the
majority-vote ternary structure its learned features induce."""

from .algebra import TruthTable, class_centers, phi, truth_table
from .nn import Activation, DenseLayer, Network, backward, forward, init_network
from .task import DomainElement, full_domain, split
from .tgs import AxiomProfile, FiniteTGS, axiom_profile, canonical_boolean_4, classify_type
from .trainer import TrainConfig, build_prototype, classify, train_baseline, train_logic

__version__ = "0.1.0"
