"""Shared fixtures: small synthetic city specs and a noiseless periodic series."""

import numpy as np
import pytest

from cellcast import Archetype, BinnedCellSeries, SynthSpec

BIN_WIDTH_MS = 30 * 60 * 1000
BINS_PER_DAY = 48
SPAN_START = 1_383_260_400_000  # 2013-11-01 00:00 at UTC+1


def periodic_series(days=62, cell_id=0, span_start=SPAN_START):
    """Noiseless series with one smooth bump per day, values in [10, 30]."""
    t = np.arange(days * BINS_PER_DAY)
    values = 20.0 + 10.0 * np.sin(2.0 * np.pi * t / BINS_PER_DAY)
    return BinnedCellSeries(cell_id=cell_id, span_start=span_start, values=values)


@pytest.fixture
def flat_spec():
    """One constant archetype, one cell, two days, no noise."""
    arch = Archetype(id=0, base_level=2.0, period_weights=(1.0,) * 6)
    return SynthSpec(archetypes=[arch], cells_per_archetype=1, days=2, seed=123)


@pytest.fixture
def small_city_spec():
    """Three well separated archetypes, two cells each, four days."""
    archs = []
    for i in range(3):
        weights = [1.0] * 6
        weights[2 * i] = 6.0
        archs.append(
            Archetype(
                id=i,
                base_level=10.0 * (i + 1),
                period_weights=tuple(weights),
                noise_sd=0.25,
            )
        )
    return SynthSpec(archetypes=archs, cells_per_archetype=2, days=4, seed=7)


@pytest.fixture
def daily_series():
    return periodic_series(days=62)
