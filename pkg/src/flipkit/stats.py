"""Adjacency combinatorics, run-length histograms, and intra-row clustering
analysis of flip profiles against a uniform (Bernoulli) null model.

The null model for a row with n flips treats every bit as an independent
Bernoulli trial with p = n / row_bits, so the distance to the next flip is
geometric with mean 1/p. Observed per-row gap means are computed from
successive differences of sorted flip positions; note that conditioning on
exactly n flips inside a finite row shrinks the expected successive gap to
row_bits/(n+1), an effect that matters for small n when comparing against
the 1/p column. Significance testing therefore uses Monte-Carlo resampling
of the matched null rather than the closed form.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .profiles import FlipProfile, byte_masks, group_by_row, synth_uniform


# ---------------------------------------------------------------------------
# Adjacency combinatorics
# ---------------------------------------------------------------------------

def total_combinations(n: int, k: int) -> int:
    """C(n, k): ways to arrange k flipped bits among n."""
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return math.comb(n, k)


def adjacent_configurations(n: int, k: int) -> int:
    """A(n, k) = n - k + 1: contiguous runs of length k in n bits."""
    if k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    return n - k + 1


def p_adjacent(n: int, k: int) -> float:
    """Probability that k uniformly placed flips in n bits form one run."""
    return float(Fraction(adjacent_configurations(n, k), total_combinations(n, k)))


def classify_byte_mask(mask: int) -> tuple[int, bool]:
    """Return (popcount, True iff the set bits form one contiguous run)."""
    if not 0 < mask < 256:
        raise ValueError(f"mask must be a nonzero byte value, got {mask}")
    k = mask.bit_count()
    shifted = mask >> ((mask & -mask).bit_length() - 1)
    return k, (shifted & (shifted + 1)) == 0


@dataclass(frozen=True, slots=True)
class AdjacencyRow:
    """Observed vs. theoretical adjacency for bytes with exactly k flips."""

    k: int
    sample_count: int
    observed_adjacent_fraction: float
    theoretical_fraction: float


def adjacency_report(profile: FlipProfile) -> list[AdjacencyRow]:
    """Per multi-flip count k: the fraction of k-flip bytes whose flips are
    one contiguous run, next to the combinatorial expectation A(8,k)/C(8,k)."""
    totals: dict[int, int] = {}
    adjacent: dict[int, int] = {}
    for row_set in group_by_row(profile):
        for bm in byte_masks(row_set):
            k, is_run = classify_byte_mask(bm.mask)
            if k < 2:
                continue
            totals[k] = totals.get(k, 0) + 1
            if is_run:
                adjacent[k] = adjacent.get(k, 0) + 1
    return [
        AdjacencyRow(k, totals[k], adjacent.get(k, 0) / totals[k], p_adjacent(8, k))
        for k in sorted(totals)
    ]


# ---------------------------------------------------------------------------
# Run lengths
# ---------------------------------------------------------------------------

class RunScope(enum.Enum):
    WITHIN_ROW = "within-row"
    WITHIN_BYTE = "within-byte"


@dataclass(frozen=True, slots=True)
class RunLengthHistogram:
    """Counts of maximal runs of consecutive flipped bit positions."""

    counts: dict[int, int]

    def total_runs(self) -> int:
        return sum(self.counts.values())

    def total_flips(self) -> int:
        return sum(length * c for length, c in self.counts.items())


def _count_runs(positions: list[int], break_at_bytes: bool, counts: dict[int, int]) -> None:
    run = 0
    prev = None
    for pos in positions:
        extends = prev is not None and pos == prev + 1
        if extends and break_at_bytes and pos % 8 == 0:
            extends = False
        if extends:
            run += 1
        else:
            if run:
                counts[run] = counts.get(run, 0) + 1
            run = 1
        prev = pos
    if run:
        counts[run] = counts.get(run, 0) + 1


def run_length_histogram(
    profile: FlipProfile, scope: RunScope = RunScope.WITHIN_ROW
) -> RunLengthHistogram:
    """Histogram of maximal consecutive-flip run lengths.

    WITHIN_ROW treats each row as one contiguous bit string, so runs may
    cross byte boundaries; WITHIN_BYTE restarts at every byte boundary.
    """
    counts: dict[int, int] = {}
    for row_set in group_by_row(profile):
        positions = row_set.bit_positions()
        _count_runs(positions, scope is RunScope.WITHIN_BYTE, counts)
    return RunLengthHistogram(counts)


# ---------------------------------------------------------------------------
# Distance analysis
# ---------------------------------------------------------------------------

class Granularity(enum.Enum):
    BIT = "bit"
    BYTE = "byte"


class DistanceBucket(NamedTuple):
    row_count: int
    observed_mean_distance: float
    expected_mean_distance: float


@dataclass(frozen=True, slots=True)
class DistanceReport:
    """Per flips-in-row bucket: observed mean consecutive gap vs. the
    geometric-model mean (positions-per-row / n)."""

    granularity: Granularity
    buckets: dict[int, DistanceBucket]


def _row_positions(row_set, granularity: Granularity) -> list[int]:
    if granularity is Granularity.BIT:
        return row_set.bit_positions()
    return sorted({byte for byte, _, _ in row_set.flips})


def distance_report(
    profile: FlipProfile, granularity: Granularity = Granularity.BYTE
) -> DistanceReport:
    """Bucket rows by their position count n and compare the mean successive
    gap against the null-model mean. Rows with fewer than two positions at
    the chosen granularity are skipped."""
    per_row = profile.row_size_bytes * (8 if granularity is Granularity.BIT else 1)
    gaps_by_n: dict[int, list[int]] = {}
    rows_by_n: dict[int, int] = {}
    for row_set in group_by_row(profile):
        positions = _row_positions(row_set, granularity)
        if len(positions) < 2:
            continue
        n = len(positions)
        bucket = gaps_by_n.setdefault(n, [])
        bucket.extend(b - a for a, b in zip(positions, positions[1:]))
        rows_by_n[n] = rows_by_n.get(n, 0) + 1
    buckets = {
        n: DistanceBucket(
            rows_by_n[n],
            sum(gaps) / len(gaps),
            per_row / n,
        )
        for n, gaps in sorted(gaps_by_n.items())
    }
    return DistanceReport(granularity, buckets)


def mean_gap(profile: FlipProfile, granularity: Granularity = Granularity.BIT) -> float:
    """Aggregate mean successive gap pooled over all rows with >= 2 positions."""
    total = 0
    count = 0
    for row_set in group_by_row(profile):
        positions = _row_positions(row_set, granularity)
        if len(positions) < 2:
            continue
        total += positions[-1] - positions[0]
        count += len(positions) - 1
    if count == 0:
        raise ValueError("profile has no row with two or more flips")
    return total / count


def global_mean_gap(profile: FlipProfile) -> float:
    """Mean bit distance between consecutive flips over the profile's whole
    address space, with rows concatenated in (dimm, bank, row) order.

    This estimates the null model's inter-arrival mean 1/p without the
    per-row truncation bias of :func:`mean_gap` (one censored gap overall
    instead of one per row), so for a uniform profile with n flips per row
    it converges to row_bits/n.
    """
    row_bits = profile.row_bits
    positions: list[int] = []
    row_index: dict[tuple[str, int, int], int] = {}
    for row_set in group_by_row(profile):
        key = (row_set.dimm_id, row_set.bank, row_set.row)
        idx = row_index.setdefault(key, len(row_index))
        base = idx * row_bits
        positions.extend(base + p for p in row_set.bit_positions())
    if len(positions) < 2:
        raise ValueError("profile has fewer than two flips")
    positions.sort()
    return (positions[-1] - positions[0]) / (len(positions) - 1)


# ---------------------------------------------------------------------------
# Monte-Carlo significance
# ---------------------------------------------------------------------------

class Statistic(enum.Enum):
    MEAN_GAP = "mean-gap"


def monte_carlo_p_value(
    profile: FlipProfile,
    statistic: Statistic = Statistic.MEAN_GAP,
    trials: int = 1000,
    seed: int = 0,
) -> float:
    """One-sided Monte-Carlo p-value for clustering.

    Null profiles are drawn uniformly with the observed per-row flip counts;
    the p-value is the fraction of trials whose aggregate mean gap is at
    most the observed one. Deterministic for a given seed; trial t uses an
    RNG derived from (seed, t) so trials are order-independent.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if statistic is not Statistic.MEAN_GAP:
        raise ValueError(f"unknown statistic {statistic!r}")
    observed = mean_gap(profile, Granularity.BIT)
    row_counts = [rs.n_flips for rs in group_by_row(profile)]
    row_bits = profile.row_bits
    hits = 0
    for trial in range(trials):
        rng = random.Random(f"mc:{seed}:{trial}")
        total = 0
        count = 0
        for n in row_counts:
            if n < 2:
                continue
            positions = sorted(rng.sample(range(row_bits), n))
            total += positions[-1] - positions[0]
            count += n - 1
        if count and total / count <= observed:
            hits += 1
    return hits / trials


def geometric_pmf(p: float, d: int) -> float:
    """(1-p)^(d-1) * p: distance d to the next flip under the null model."""
    if not 0 < p <= 1:
        raise ValueError(f"p must be in (0, 1], got {p}")
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    return (1.0 - p) ** (d - 1) * p


def null_calibration_profile(rows: int, flips_per_row: int, seed: int) -> FlipProfile:
    """Convenience wrapper used by calibration tests and scripts."""
    return synth_uniform(rows, flips_per_row, seed)


# ---------------------------------------------------------------------------
# Report serialization (CSV columns documented per emitter)
# ---------------------------------------------------------------------------

def adjacency_to_csv(rows: list[AdjacencyRow]) -> str:
    """Columns: k, sample_count, observed_pct, theoretical_pct."""
    lines = ["k,sample_count,observed_pct,theoretical_pct"]
    for r in rows:
        lines.append(
            f"{r.k},{r.sample_count},{100.0 * r.observed_adjacent_fraction!r},"
            f"{100.0 * r.theoretical_fraction!r}"
        )
    return "\n".join(lines) + "\n"


def adjacency_to_json(rows: list[AdjacencyRow]) -> str:
    return json.dumps(
        [
            {
                "k": r.k,
                "sample_count": r.sample_count,
                "observed_pct": 100.0 * r.observed_adjacent_fraction,
                "theoretical_pct": 100.0 * r.theoretical_fraction,
            }
            for r in rows
        ],
        indent=2,
    ) + "\n"


def histogram_to_csv(hist: RunLengthHistogram) -> str:
    """Columns: run_length, count. This is the fig1 table."""
    lines = ["run_length,count"]
    for length in sorted(hist.counts):
        lines.append(f"{length},{hist.counts[length]}")
    return "\n".join(lines) + "\n"


def histogram_to_json(hist: RunLengthHistogram) -> str:
    return json.dumps(
        {str(k): v for k, v in sorted(hist.counts.items())}, indent=2
    ) + "\n"


def distance_to_csv(report: DistanceReport) -> str:
    """Columns: n, rows, observed_mean, expected_mean. This is the fig2 table."""
    lines = ["n,rows,observed_mean,expected_mean"]
    for n, bucket in sorted(report.buckets.items()):
        lines.append(
            f"{n},{bucket.row_count},{bucket.observed_mean_distance!r},"
            f"{bucket.expected_mean_distance!r}"
        )
    return "\n".join(lines) + "\n"


def distance_to_json(report: DistanceReport) -> str:
    return json.dumps(
        {
            "granularity": report.granularity.value,
            "buckets": {
                str(n): {
                    "rows": b.row_count,
                    "observed_mean": b.observed_mean_distance,
                    "expected_mean": b.expected_mean_distance,
                }
                for n, b in sorted(report.buckets.items())
            },
        },
        indent=2,
    ) + "\n"
