"""Decomposition bounds for finite reversible Markov chains, with oracles."""

from .bounds import BoundResult, lsob_bound, poincare_bound
from .chain import (
    Distribution,
    ReversibleChain,
    build_chain,
    dirichlet_form,
    expectation,
    lsob_entropy,
    variance,
)
from .decomp import DecompositionReport, Partition, decompose, project, restrict
from .errors import DecompMCError
from .spectral import LsobCertificate, SpectralCertificate, log_sobolev_constant, spectral_gap

__version__ = "0.1.0"

__all__ = [
    "BoundResult", "DecompMCError", "DecompositionReport", "Distribution", "LsobCertificate",
    "Partition", "ReversibleChain", "SpectralCertificate", "build_chain", "decompose",
    "dirichlet_form", "expectation", "log_sobolev_constant", "lsob_bound", "lsob_entropy",
    "poincare_bound", "project", "restrict", "spectral_gap", "variance",
]
