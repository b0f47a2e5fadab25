"""Links of branch points of surfaces in R^4 as closed braids."""

__version__ = "0.1.0"
