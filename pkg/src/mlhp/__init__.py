"""Multi-level Hermite-Pade polynomials for rationally perturbed Nikishin systems.

Modules
-------
measures
    Interval measures, Gauss quadrature and Cauchy transforms.
nikishin
    Discretized Nikishin systems and rational perturbations.
hp_solver
    Order conditions and their kernel at high precision.
forms
    Forms ``A_{n,j}``, zero factorization and weighted norms.
equilibrium
    Discrete vector equilibrium and the predicted exponent fields.
verify
    Measured data against the predicted fields.
config, cli
    Experiment configuration and the command line harness.
"""

__version__ = "0.1.0"
