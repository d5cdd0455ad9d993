"""Core trajectory types, geodesy, normalization and preprocessing."""
