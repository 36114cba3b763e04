"""Local-divisor toolkit for finite monoids and aperiodic languages."""

__version__ = "0.1.0"
