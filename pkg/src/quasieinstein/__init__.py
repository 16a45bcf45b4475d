"""Numerical verification of m-quasi-Einstein identities and Killing criteria."""
__version__ = "0.1.0"
