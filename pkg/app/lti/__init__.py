"""Discrete-time LTI algebra on state-space realizations."""
