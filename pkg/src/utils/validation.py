"""Input validation utilities."""
import re
from typing import Sequence

import numpy as np

from .errors import InvalidSpec

ROW_SUM_TOL = 1e-12
VALID_LABEL = re.compile(r"^[A-Za-z0-9_.+-]+$")


def validate_label(label: str) -> bool:
    """Validate a state label (printable token without whitespace or '#')."""
    return bool(VALID_LABEL.match(label))


def validate_labels(labels: Sequence[str], size: int) -> None:
    """Check that labels are valid, distinct and match the state count."""
    if len(labels) != size:
        raise InvalidSpec(f"Expected {size} labels, got {len(labels)}")
    for label in labels:
        if not validate_label(label):
            raise InvalidSpec(f"Invalid state label: {label!r}")
    if len(set(labels)) != len(labels):
        raise InvalidSpec(f"State labels must be distinct: {list(labels)}")


def validate_stochastic(p: np.ndarray, tol: float = ROW_SUM_TOL) -> None:
    """Validate a row-stochastic square matrix."""
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidSpec(f"Transition matrix must be square, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidSpec("Transition matrix has non-finite entries")
    if p.min() < 0.0:
        a, b = np.unravel_index(np.argmin(p), p.shape)
        raise InvalidSpec(f"Negative transition probability p[{a},{b}]={p[a, b]}")
    deviation = np.abs(p.sum(axis=1) - 1.0)
    if deviation.max() > tol:
        row = int(np.argmax(deviation))
        raise InvalidSpec(f"Row {row} sums to {p[row].sum()!r}, not 1")


def validate_probability_vector(x: np.ndarray, tol: float = ROW_SUM_TOL) -> None:
    """Validate a probability vector."""
    if x.ndim != 1 or x.min() < 0.0 or abs(x.sum() - 1.0) > tol:
        raise InvalidSpec(f"Not a probability vector: {x}")
