"""
Regression-tree ensembles built from scratch: random forests, gradient
boosting, expanding-window cross-validation and exhaustive grid search.
"""
