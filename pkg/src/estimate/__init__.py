"""Numerical and closed-form estimators."""
from .closed_form import closed_form_fit, has_closed_form
from .optimizer import FitOptions, FitResult, fit

__all__ = ["FitOptions", "FitResult", "closed_form_fit", "fit", "has_closed_form"]
