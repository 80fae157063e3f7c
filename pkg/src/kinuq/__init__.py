"""Uncertainty quantification toolbox for kinetic equations: gPC bases,
Monte Carlo and control-variate estimators, stochastic Galerkin schemes and
particle methods on gPC coefficients."""

__version__ = "0.1.0"
