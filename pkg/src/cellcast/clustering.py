"""Day-period activity profiles and seeded K-Means cell clustering.

Cells are summarized as 6-vectors of mean activity over four-hour day
periods, clustered with Lloyd's algorithm under a spread-out seeded
initialization, and the cluster count is picked from the SSE-vs-k curve
by maximum distance to the chord (a mechanical stand-in for eyeballing
the elbow).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CurveTooShort,
    Empty,
    EmptySeries,
    InvalidK,
    LengthMismatch,
    MissingSeries,
    SpanMismatch,
    TooFewPoints,
)
from .ingest import BIN_WIDTH_MS, MS_PER_HOUR, BinnedCellSeries

N_PERIODS = 6
HOURS_PER_PERIOD = 4
PERIOD_NAMES = ("LateNight", "EarlyMorning", "Morning", "Afternoon", "Evening", "Night")
DEFAULT_UTC_OFFSET_HOURS = 1.0  # Milan's local clock in the source data


@dataclass(frozen=True)
class PeriodProfile:
    """Mean 30-minute activity of one cell per day period.

    ``means`` is ordered [LateNight, EarlyMorning, Morning, Afternoon,
    Evening, Night], i.e. by period start hour 0, 4, 8, 12, 16, 20.
    """

    cell_id: int
    means: np.ndarray


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray  # shape (k, 6)
    assignment: dict[int, int]  # cell_id -> cluster index in [0, k)
    iterations_run: int
    sse: float
    # SSE after every assignment pass of the winning restart; monotone
    # non-increasing. Not persisted.
    sse_history: list[float] = field(default_factory=list)


@dataclass
class SseCurve:
    entries: list[tuple[int, float]]  # (k, sse), k strictly increasing


def bin_periods(series: BinnedCellSeries, utc_offset_hours: float) -> np.ndarray:
    """Day-period index (0..5) of each bin's local start time."""
    offset_ms = round(utc_offset_hours * MS_PER_HOUR)
    starts = series.span_start + np.arange(series.n_bins, dtype=np.int64) * series.bin_width_ms
    local_hours = ((starts + offset_ms) // MS_PER_HOUR) % 24
    return (local_hours // HOURS_PER_PERIOD).astype(np.intp)


def period_profile(series: BinnedCellSeries,
                   utc_offset_hours: float = DEFAULT_UTC_OFFSET_HOURS) -> PeriodProfile:
    """Average the series within each of the six four-hour day periods.

    Periods are start-inclusive, end-exclusive: a bin starting 04:00
    local time counts toward EarlyMorning. Periods with no bins (series
    shorter than a day) get mean 0.
    """
    if series.n_bins == 0:
        raise EmptySeries(f"cell {series.cell_id} has no bins")
    periods = bin_periods(series, utc_offset_hours)
    sums = np.bincount(periods, weights=series.values, minlength=N_PERIODS)
    counts = np.bincount(periods, minlength=N_PERIODS)
    means = np.divide(sums, counts, out=np.zeros(N_PERIODS), where=counts > 0)
    return PeriodProfile(cell_id=series.cell_id, means=means)


def build_profiles(cells: dict[int, BinnedCellSeries],
                   utc_offset_hours: float = DEFAULT_UTC_OFFSET_HOURS) -> list[PeriodProfile]:
    """Profiles for every cell, ordered by cell id."""
    return [period_profile(cells[cid], utc_offset_hours) for cid in sorted(cells)]


def _profile_matrix(profiles: list[PeriodProfile]) -> tuple[list[int], np.ndarray]:
    if not profiles:
        raise TooFewPoints("no profiles to cluster")
    cell_ids = [p.cell_id for p in profiles]
    points = np.vstack([np.asarray(p.means, dtype=np.float64) for p in profiles])
    return cell_ids, points


def _init_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Spread-out seeding: next centroid drawn proportional to squared
    distance from the already-chosen ones."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)  # ties resolve to the lowest index
    sse = float(d2[np.arange(points.shape[0]), labels].sum())
    return labels, sse


def _update(points: np.ndarray, labels: np.ndarray, k: int,
            centroids: np.ndarray) -> np.ndarray:
    new = centroids.copy()
    counts = np.bincount(labels, minlength=k)
    for j in range(k):
        if counts[j] > 0:
            new[j] = points[labels == j].mean(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        # Re-seed each emptied centroid to a point far from its own
        # centroid; taking successive farthest points keeps repairs distinct.
        d_own = ((points - new[labels]) ** 2).sum(axis=1)
        order = np.argsort(-d_own, kind="stable")
        for slot, j in enumerate(empty):
            new[j] = points[order[slot % len(order)]]
    return new


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int) -> tuple[np.ndarray, np.ndarray, float, list[float], int]:
    centroids = _init_centroids(points, k, rng)
    labels, sse = _assign(points, centroids)
    history = [sse]
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        centroids = _update(points, labels, k, centroids)
        new_labels, sse = _assign(points, centroids)
        history.append(sse)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centroids, labels, sse, history, iterations


def kmeans(profiles: list[PeriodProfile], k: int, seed: int = 0,
           max_iter: int = 300, restarts: int = 10) -> ClusterModel:
    """Best-of-restarts Lloyd clustering of the period profiles.

    Restart r draws from its own stream derived as [seed, r], so adding
    restarts never perturbs earlier ones, and the same restart explores
    the same initial points at every k (which keeps the SSE-vs-k curve
    well behaved). Ties on SSE go to the earliest restart.
    """
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    cell_ids, points = _profile_matrix(profiles)
    n_distinct = np.unique(points, axis=0).shape[0]
    if n_distinct < k:
        raise TooFewPoints(f"{n_distinct} distinct profiles < k={k}")

    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        result = _lloyd(points, k, rng, max_iter)
        if best is None or result[2] < best[2]:
            best = result
    centroids, labels, sse, history, iterations = best
    assignment = {cid: int(labels[i]) for i, cid in enumerate(cell_ids)}
    return ClusterModel(k=k, centroids=centroids, assignment=assignment,
                        iterations_run=iterations, sse=sse, sse_history=history)


def elbow_scan(profiles: list[PeriodProfile], k_max: int, seed: int = 0,
               restarts: int = 10) -> SseCurve:
    """Best-of-restarts SSE for every k in 1..k_max."""
    entries = []
    for k in range(1, k_max + 1):
        model = kmeans(profiles, k, seed=seed, restarts=restarts)
        entries.append((k, model.sse))
    return SseCurve(entries=entries)


def knee_point(curve: SseCurve) -> int:
    """The k at maximum perpendicular distance from the curve to the
    chord joining its endpoints, with both axes min-max scaled.

    Only interior points are candidates; ties go to the smaller k. This
    mechanizes the visual elbow pick, so callers should still surface
    the full curve for a human override.
    """
    if len(curve.entries) < 3:
        raise CurveTooShort(f"need >= 3 entries, got {len(curve.entries)}")
    ks = np.array([k for k, _ in curve.entries], dtype=np.float64)
    sses = np.array([s for _, s in curve.entries], dtype=np.float64)
    x = (ks - ks[0]) / (ks[-1] - ks[0])
    span = sses.max() - sses.min()
    y = (sses - sses.min()) / span if span > 0 else np.zeros_like(sses)
    # Perpendicular distance to the chord from (x0,y0) to (x1,y1).
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    chord = np.hypot(dx, dy)
    dist = np.abs(dx * (y[0] - y) - (x[0] - x) * dy) / chord
    interior = dist[1:len(ks) - 1]
    # Smallest k within rounding noise of the max, so mathematically tied
    # distances (e.g. an exactly linear curve) resolve to the lower k.
    best_idx = 1 + int(np.flatnonzero(interior >= interior.max() - 1e-12)[0])
    return int(ks[best_idx])


def cluster_mean_series(model: ClusterModel,
                        binned: dict[int, BinnedCellSeries]) -> dict[int, BinnedCellSeries]:
    """Per-cluster mean of its member cells' binned series.

    The returned series carry the cluster index in the cell_id slot.
    """
    members: dict[int, list[int]] = {}
    for cid, cluster in model.assignment.items():
        members.setdefault(cluster, []).append(cid)

    reference = None
    for cid in model.assignment:
        if cid not in binned:
            raise MissingSeries(f"no binned series for cell {cid}")
        s = binned[cid]
        key = (s.span_start, s.bin_width_ms, s.n_bins)
        if reference is None:
            reference = key
        elif key != reference:
            raise SpanMismatch(f"cell {cid} span {key} != {reference}")

    out = {}
    for cluster in sorted(members):
        cells = members[cluster]
        total = np.zeros(reference[2])
        for cid in cells:
            total += binned[cid].values
        out[cluster] = BinnedCellSeries(
            cell_id=cluster,
            span_start=reference[0],
            values=total / len(cells),
            bin_width_ms=reference[1],
        )
    return out


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected pair-counting agreement between two labelings.

    1.0 for identical partitions, about 0 for independent ones. Also 1.0
    when both partitions are trivial (all singletons or one block), where
    the correction's denominator vanishes.
    """
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} labels vs {len(b)}")
    if not a:
        raise Empty("no labels")

    def comb2(x: float) -> float:
        return x * (x - 1) / 2.0

    contingency: dict[tuple, int] = {}
    counts_a: dict = {}
    counts_b: dict = {}
    for la, lb in zip(a, b):
        contingency[(la, lb)] = contingency.get((la, lb), 0) + 1
        counts_a[la] = counts_a.get(la, 0) + 1
        counts_b[lb] = counts_b.get(lb, 0) + 1

    sum_ij = sum(comb2(n) for n in contingency.values())
    sum_a = sum(comb2(n) for n in counts_a.values())
    sum_b = sum(comb2(n) for n in counts_b.values())
    n_pairs = comb2(len(a))
    expected = sum_a * sum_b / n_pairs if n_pairs > 0 else 0.0
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return (sum_ij - expected) / (max_index - expected)


def save_cluster_json(model: ClusterModel, path: str) -> None:
    payload = {
        "k": model.k,
        "centroids": [[float(v) for v in row] for row in model.centroids],
        "assignment": {str(cid): model.assignment[cid] for cid in sorted(model.assignment)},
        "sse": float(model.sse),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_cluster_json(path: str) -> ClusterModel:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return ClusterModel(
        k=int(payload["k"]),
        centroids=np.asarray(payload["centroids"], dtype=np.float64),
        assignment={int(cid): int(c) for cid, c in payload["assignment"].items()},
        iterations_run=0,
        sse=float(payload["sse"]),
    )


def save_sse_csv(curve: SseCurve, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "sse"])
        for k, sse in curve.entries:
            writer.writerow([k, f"{sse:.17g}"])


def load_sse_csv(path: str) -> SseCurve:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        entries = [(int(row[0]), float(row[1])) for row in reader]
    return SseCurve(entries=entries)
