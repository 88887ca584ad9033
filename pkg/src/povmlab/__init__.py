"""
povmlab - positive operator valued measures on truncated Hilbert spaces.

This package builds POVMs by Markov-kernel smearing of spectral measures and by
explicit matrix-element formulas, and tests their structural properties:
uniform continuity, absolute continuity, the norm-1 property, commutativity and
phase covariance.
"""

__version__ = "0.1.0"
