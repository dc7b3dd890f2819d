"""Risk-sensitive safe sets as sublevel sets of optimal value tables.

A safe set is the set of grid states whose optimal risk value is at most
a threshold r.  Sets are represented as boolean node masks; contour
extraction is left to consumers of the CSV export.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import InputError
from .model import ValueTable

__all__ = ["sublevel_mask", "nesting_check", "export_mask_csv"]


def sublevel_mask(values: ValueTable, r: float) -> np.ndarray:
    """Boolean mask over grid nodes: value <= r."""
    if not np.all(np.isfinite(values.values)):
        raise InputError("value table contains non-finite entries")
    return values.values <= float(r)


def nesting_check(mask_a: np.ndarray, mask_b: np.ndarray) -> bool:
    """True iff mask_a is contained in mask_b (elementwise implication)."""
    mask_a = np.asarray(mask_a, dtype=bool)
    mask_b = np.asarray(mask_b, dtype=bool)
    if mask_a.shape != mask_b.shape:
        raise InputError(
            f"grid mismatch: {mask_a.shape} vs {mask_b.shape}")
    return bool(np.all(~mask_a | mask_b))


def export_mask_csv(values: ValueTable, mask: np.ndarray, path) -> None:
    """Write one row per node: coordinates, value, 0/1 membership."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != values.values.shape:
        raise InputError("mask shape does not match the value table")
    axes = values.axes
    header = [f"x{i + 1}" for i in range(len(axes))] + ["value", "member"]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=-1)
    flat_vals = values.values.ravel()
    flat_mask = mask.ravel().astype(int)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(coords.shape[0]):
            writer.writerow([repr(float(c)) for c in coords[i]]
                            + [repr(float(flat_vals[i])), flat_mask[i]])
