"""Exact construction and finite verification of Singer-cycle lattices in PGL_d(F_q((t)))."""
__version__ = "0.1.0"
