"""Minimax and average-cost/worst-case-constraint estimator synthesis."""
