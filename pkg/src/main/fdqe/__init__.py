"""
fdqe

Quantifier elimination for finite-dimensional C*-algebras: the Bratteli-level decision procedure in four languages,
embedding enumeration and DOT export, and numeric evaluation of the distance predicates.
"""

__version__ = "1.0.0"
