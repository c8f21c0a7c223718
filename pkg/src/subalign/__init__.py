"""Subspace alignment domain adaptation with classical, kernel, and
desk-scale quantum-simulated tracks."""

from . import classical_sa, datasets, errors, harness, quantum_core, quantum_sa

__all__ = ["classical_sa", "datasets", "errors", "harness", "quantum_core", "quantum_sa"]
__version__ = "0.1.0"
