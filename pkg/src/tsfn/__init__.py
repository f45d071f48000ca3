"""Truncated saddle-free Newton optimization with a simulated quantum step.

Subpackages and modules:

- ``linalg``: symmetric eigensolver, truncated inverses, low-rank inverse
- ``rmt``: Wishart sampling and the Marchenko–Pastur law
- ``objectives``: Rosenbrock, Morse quadratics, a small MLP
- ``optimizer``: gd, Newton, saddle-free Newton and its truncated variant
- ``qsim``: exact simulation of the quantum pipeline for one step
- ``rsvd``: column-sampling SVD and its error bounds
- ``dataio``: CSV data, PCA variance explained, Hessian outlier report
"""

__version__ = "0.1.0"
