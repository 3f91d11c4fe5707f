"""Query-efficient learning of fermionic linear optics.

Submodules: :mod:`matlin` (matrix kernels), :mod:`florep` (FLO
representations and gate compilation), :mod:`gsim` (covariance-matrix
simulator), :mod:`foracle` (dense Fock-space oracle), :mod:`shadows`
(randomized-measurement estimators and sample sizes) and :mod:`learn`.
"""

__version__ = "0.1.0"
