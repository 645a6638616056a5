"""A priori voting power in liquid democracy and proxy voting."""

__version__ = "0.1.0"
