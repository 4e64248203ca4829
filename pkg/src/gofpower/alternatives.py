"""Cell-probability profiles used as power-study alternatives.

The seven built-in rows are stored exactly as tabulated in the study
design; two of them (``decreasing`` and ``leptokurtic``) do not sum to 1
as printed, so every profile keeps both the raw weights and the
normalized probabilities, and downstream reports record both.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "AlternativeSpec",
    "normalize",
    "builtin_alternatives",
    "builtin_alternative",
    "load_alternatives",
    "BUILTIN_NAMES",
]


def normalize(raw) -> np.ndarray:
    """Scale a nonnegative weight vector to sum to 1.

    Idempotent on probability vectors; rejects all-zero input.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("weights must be a nonempty 1-d vector")
    if np.any(arr < 0):
        raise ValueError("weights must be nonnegative")
    total = float(arr.sum())
    if total <= 0.0:
        raise ValueError("weights sum to zero; cannot normalize")
    return arr / total


@dataclass(eq=False)
class AlternativeSpec:
    """A named cell-probability profile.

    ``raw`` holds the weights as given; ``p`` is the normalized
    probability vector actually used for sampling.
    """

    name: str
    raw: np.ndarray
    p: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.raw = np.asarray(self.raw, dtype=np.float64)
        self.p = normalize(self.raw)
        self.raw.setflags(write=False)
        self.p.setflags(write=False)

    @property
    def raw_sum(self) -> float:
        return float(self.raw.sum())


_BUILTIN_ROWS = (
    ("uniform", (0.10, 0.10, 0.10, 0.10, 0.10, 0.10, 0.10, 0.10, 0.10, 0.10)),
    ("decreasing", (0.32, 0.13, 0.10, 0.08, 0.07, 0.07, 0.06, 0.06, 0.05, 0.05)),
    ("step", (0.05, 0.05, 0.05, 0.05, 0.05, 0.15, 0.15, 0.15, 0.15, 0.15)),
    ("triangular", (0.17, 0.13, 0.10, 0.07, 0.03, 0.03, 0.07, 0.10, 0.13, 0.17)),
    ("platykurtic", (0.04, 0.11, 0.11, 0.12, 0.12, 0.12, 0.12, 0.11, 0.11, 0.04)),
    ("leptokurtic", (0.05, 0.05, 0.05, 0.05, 0.30, 0.05, 0.05, 0.05, 0.05, 0.05)),
    ("bimodal", (0.05, 0.11, 0.17, 0.11, 0.06, 0.06, 0.11, 0.17, 0.11, 0.05)),
)

BUILTIN_NAMES = tuple(name for name, _ in _BUILTIN_ROWS)


def builtin_alternatives() -> list[AlternativeSpec]:
    """The seven built-in profiles, uniform first."""
    return [AlternativeSpec(name, np.array(row)) for name, row in _BUILTIN_ROWS]


def builtin_alternative(name: str) -> AlternativeSpec:
    key = name.strip().lower()
    for row_name, row in _BUILTIN_ROWS:
        if row_name == key:
            return AlternativeSpec(row_name, np.array(row))
    raise ValueError(f"unknown alternative name: {name!r}")


def load_alternatives(path) -> list[AlternativeSpec]:
    """Read profiles from a plain-text file.

    One profile per line: a name followed by whitespace-separated
    nonnegative weights.  Blank lines and lines starting with ``#`` are
    skipped; weights are normalized on load.
    """
    specs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) < 3:
            raise ValueError(
                f"{path}:{lineno}: expected a name and at least two weights"
            )
        try:
            raw = np.array([float(tok) for tok in fields[1:]])
        except ValueError:
            raise ValueError(
                f"{path}:{lineno}: non-numeric weight in {stripped!r}"
            ) from None
        specs.append(AlternativeSpec(fields[0], raw))
    if not specs:
        raise ValueError(f"{path}: no profiles found")
    return specs
