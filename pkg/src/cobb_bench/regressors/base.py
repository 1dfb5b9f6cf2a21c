"""Errors shared by the estimators."""


class FitError(RuntimeError):
    """A fit that cannot produce a usable model (divergence, failed factorisation)."""


class ConvergenceWarning(UserWarning):
    """An iterative fit hit its iteration cap; the model is usable but flagged."""
