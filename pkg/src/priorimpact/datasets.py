"""Bundled example data and small data utilities.

Two fixtures back the demonstration experiments:

* a classic four-group dose–response assay (log-doses, group sizes, deaths),
  used by the logistic-regression demo;
* a seeded synthetic sample from a right-skewed distribution, used by the
  skew-normal demo.

The half-sample mode estimator lives here too: it locates the densest region
of a draw cloud and is robust to the very diffuse tails that weakly
identified posteriors produce.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .distributions import SkewNormal
from .errors import ValidationError

__all__ = [
    "BioassayData",
    "bioassay",
    "skewed_demo_sample",
    "SKEWED_DEMO_SEED",
    "half_sample_mode",
]


class BioassayData(NamedTuple):
    """A dose–response assay: one row per dose group."""

    log_doses: np.ndarray
    trials: np.ndarray
    deaths: np.ndarray


_BIOASSAY_LOG_DOSES = (-0.863, -0.296, -0.053, 0.727)
_BIOASSAY_TRIALS = (5, 5, 5, 5)
_BIOASSAY_DEATHS = (0, 1, 3, 5)


def bioassay() -> BioassayData:
    """The classic four-dose assay: 5 animals per group, deaths 0/1/3/5."""
    return BioassayData(
        log_doses=np.array(_BIOASSAY_LOG_DOSES, dtype=float),
        trials=np.array(_BIOASSAY_TRIALS, dtype=np.int64),
        deaths=np.array(_BIOASSAY_DEATHS, dtype=np.int64),
    )


SKEWED_DEMO_SEED = 7


def skewed_demo_sample(size: int = 50, seed: int = SKEWED_DEMO_SEED) -> np.ndarray:
    """A fixed synthetic sample from SkewNormal(0, 1, 5).

    The default seed is part of the fixture: the demo experiments always
    analyse the same dataset so their outputs are comparable across runs.
    """
    if size < 3:
        raise ValidationError(f"demo sample needs size >= 3, got {size}")
    rng = np.random.default_rng(seed)
    return SkewNormal(0.0, 1.0, 5.0).sample(rng, size)


def half_sample_mode(values: Sequence[float]) -> float:
    """Mode estimate via recursive densest half-samples.

    Repeatedly keeps the shortest window containing ceil(n/2) of the sorted
    points, then averages the final pair. Heavy one-sided tails barely move
    the estimate, which makes this suitable for draw clouds from weakly
    identified (possibly improper) posteriors.
    """
    arr = np.sort(np.asarray(values, dtype=float).ravel())
    if arr.size == 0:
        raise ValidationError("mode of an empty sample is undefined")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("mode estimator requires finite values")
    while arr.size > 2:
        half = (arr.size + 1) // 2
        widths = arr[half - 1 :] - arr[: arr.size - half + 1]
        start = int(np.argmin(widths))
        arr = arr[start : start + half]
    return float(arr.mean())
