"""O(3) sigma model lumps on a sphere with marked points."""

__version__ = "0.1.0"
