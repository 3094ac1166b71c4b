"""Linear matrix inequality programs compiled to cvxpy."""
