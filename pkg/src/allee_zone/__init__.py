"""Principal-eigenvalue analysis of protection zones for Allee-effect populations."""

__version__ = "0.1.0"
