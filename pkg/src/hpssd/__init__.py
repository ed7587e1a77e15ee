"""Assortative network simulator with hybrid snowball sampling evaluation.

Generates cliques-and-blocks populations, runs a benchmark random sample and
four hybrid probabilistic-snowball designs on each, and scores the designs
against the benchmark over Monte Carlo sweeps.
"""

__version__ = "0.1.0"
