"""Numerical laboratory for weighted extremal Bergman kernels on polydiscs.

Submodules:
  functional  finite-support functionals acting on Taylor data
  family      holomorphic functional-valued families (polynomial in w)
  weights     certified-psh weight catalog, moments, multiplier oracles
  bergman     truncated Gram models, orthonormalization, extremal kernels
  fiberwise   fiber kernel maps and log-psh verification harness
  ideal       jet coefficient matrices, cofactor annihilators, lambda scans
  extension   minimum-norm extension from a fiber and the optimal constant
  cli         command-line front end (kernel / scan-psh / annihilate /
              lambda / extend)
"""

__version__ = "0.1.0"

__all__ = [
    "functional",
    "family",
    "weights",
    "bergman",
    "fiberwise",
    "ideal",
    "extension",
    "cli",
]
