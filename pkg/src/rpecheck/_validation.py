"""Input validation helpers shared by the estimator classes and file readers."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_sequence(lengths, *, require_unit_start: bool = False) -> tuple:
    """Validate a list of repetition counts and return it as a tuple of ints."""
    try:
        seq = tuple(int(n) for n in lengths)
    except TypeError as exc:
        raise ValueError("sequence must be an iterable of integers") from exc
    if any(isinstance(n, bool) for n in lengths):
        raise ValueError("sequence entries must be integers, not booleans")
    for raw, n in zip(lengths, seq):
        if isinstance(raw, numbers.Real) and float(raw) != n:
            raise ValueError(f"sequence entry {raw!r} is not an integer")
    if not seq:
        raise ValueError("sequence must contain at least one generation")
    if seq[0] < 1:
        raise ValueError("repetition counts must be positive")
    if any(b <= a for a, b in zip(seq, seq[1:])):
        raise ValueError(f"sequence must be strictly increasing: {list(seq)}")
    if require_unit_start and seq[0] != 1:
        raise ValueError("the first generation must use a single repetition")
    return seq


def check_counts(X) -> np.ndarray:
    """Validate a counts table of shape ``(n_generations, 4)``.

    Columns are ``successes_c, trials_c, successes_s, trials_s``.
    """
    X = check_array(X, dtype=np.int64, ensure_2d=True)
    if X.shape[1] != 4:
        raise ValueError(
            f"counts must have 4 columns (succ_c, trials_c, succ_s, trials_s), got {X.shape[1]}"
        )
    succ = X[:, [0, 2]]
    trials = X[:, [1, 3]]
    if np.any(trials < 1):
        raise ValueError("every circuit needs at least one trial")
    if np.any(succ < 0) or np.any(succ > trials):
        raise ValueError("successes must lie between 0 and the number of trials")
    return X


def check_probability(p: float, name: str = "probability") -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p
