"""Filtering helpers for streamed diagnostics samples.

    Small generator-based filters that accept an iterable of
    :class:`~fpicli.diagnostics.SampleRecord` and yield the samples matching a
    criterion. Filters chain, e.g.::

        data = traj.samples
        data = filter_since(data, signal.zero_after)
        data = filter_above_floor(data, "E", 1e-12 * E0)
"""

import math
from collections.abc import Iterable

from .diagnostics import SampleRecord


def filter_since(data: Iterable[SampleRecord], t: float | None):
    """Yield samples with time >= ``t``.

        Parameters
        - data: Iterable of samples.
        - t: If None, ``data`` is yielded unchanged.

        Yields
        - SampleRecord: samples at or after ``t``.
    """
    if t is None:
        yield from data
        return

    for sample in data:
        if sample.t >= t:
            yield sample


def filter_above_floor(data: Iterable[SampleRecord], field: str, floor: float):
    """Yield samples whose ``field`` is finite and strictly above ``floor``.

        Parameters
        - data: Iterable of samples.
        - field: Attribute to compare (e.g. "E").
        - floor: Samples at or below it are dropped.

        Yields
        - SampleRecord: samples with ``floor < sample.<field> < inf``.
    """
    for sample in data:
        value = getattr(sample, field)
        if math.isfinite(value) and value > floor:
            yield sample
