# Sphinx sources for robust_estimation
