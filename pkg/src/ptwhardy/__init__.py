"""Pointwise Hardy inequalities on finite metric measure spaces."""
