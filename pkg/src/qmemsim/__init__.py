"""Simulation toolkit for topological quantum memories."""
