"""Spectral-measure calculus at desk scale.

Dense complex linear algebra, finite-dimensional von Neumann algebras,
discrete projection-valued and non-negative spectral measures, a blockwise
model of the unbounded theory, and seeded verification harnesses for the
integral-representation correspondences.
"""

__version__ = "0.1.0"
