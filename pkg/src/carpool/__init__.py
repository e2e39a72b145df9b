"""Exact equilibrium computation for autonomous carpooling markets."""
