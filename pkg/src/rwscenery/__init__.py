"""Simulation laboratory for sums of stationary random fields along lattice random walks.

Computes local-time and self-intersection combinatorics exactly, estimates
quenched functional-CLT limit laws by Monte Carlo, and checks maximal
inequalities and asymptotic-variance constants at desk scale.
"""

__version__ = "0.1.0"
