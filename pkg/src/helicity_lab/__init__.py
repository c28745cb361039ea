"""helicity-lab: spectral building blocks and helicity diagnostics on the unit 3-torus."""

__version__ = "0.1.0"
