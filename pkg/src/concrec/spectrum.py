"""Level-compressed spectra of tensor powers of a reduced state.

The eigenvalues of the n-fold tensor power of a diagonal state with
probabilities (p_1, ..., p_r) are the products prod_i p_i^{k_i} taken over
compositions (k_1, ..., k_r) of n.  Entries sharing the same exponent
pattern against the distinct base probabilities form one *level* (a type
class): a single eigenvalue with an exact multiplicity.  The whole spectrum
is therefore stored as a short list of (log2 eigenvalue, multiplicity)
levels.  Multiplicities and cumulative counts reach 2^3000 and beyond, so
all counting is exact integer arithmetic; masses live in log2 space and are
accumulated with running log-add in double precision, which keeps the
total-mass drift around 1e-12 for spectra with thousands of levels.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    CountExceedsTotal,
    EmptyInput,
    NegativeEntry,
    NotNormalized,
    RankTooLargeForN,
)

NEG_INF = float("-inf")

# Compositions are enumerated up front; this caps the level count, not n.
DEFAULT_MAX_LEVELS = 5_000_000

_RENORM_TOL = 1e-9
_MASS_GUARD = 1e-6


def log2_int(value: int) -> float:
    """Base-2 logarithm of a positive integer of any bit length.

    Uses the bit length plus a 53-bit mantissa, so the result is accurate to
    about one ulp even when ``value`` far exceeds the double range.
    """
    if value <= 0:
        raise ValueError("log2_int requires a positive integer")
    nbits = value.bit_length()
    if nbits <= 53:
        return math.log2(value)
    shift = nbits - 53
    return math.log2(value >> shift) + shift


def _exp2(x: float) -> float:
    """2**x as a float, saturating to inf instead of raising on overflow."""
    if x == NEG_INF:
        return 0.0
    try:
        return math.pow(2.0, x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class SchmidtVector:
    """Sorted squared Schmidt coefficients of a bipartite pure state.

    Attributes
    ----------
    probs : tuple of float
        Strictly positive probabilities in non-increasing order, summing
        to 1 within 1e-12.
    rank : int
        Number of entries (the Schmidt rank).
    """

    probs: tuple[float, ...]
    rank: int

    def __post_init__(self) -> None:
        if self.rank != len(self.probs):
            raise ValueError("rank must equal the number of entries")
        if not self.probs:
            raise EmptyInput("a Schmidt vector needs at least one entry")
        for a, b in zip(self.probs, self.probs[1:]):
            if b > a:
                raise ValueError("entries must be non-increasing")
        if self.probs[-1] <= 0.0:
            raise ValueError("entries must be strictly positive")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise NotNormalized("entries must sum to 1 within 1e-12")


def make_schmidt(probs: Sequence[float]) -> SchmidtVector:
    """Build a :class:`SchmidtVector` from raw probabilities.

    Zero entries are dropped, the rest are sorted in non-increasing order and
    renormalized, provided the input sum is within 1e-9 of 1.
    """
    entries = [float(p) for p in probs]
    if not entries:
        raise EmptyInput("no probabilities given")
    for p in entries:
        if not p >= 0.0:  # also rejects NaN
            raise NegativeEntry(f"not a non-negative probability: {p!r}")
    kept = [p for p in entries if p > 0.0]
    if not kept:
        raise EmptyInput("all probabilities are zero")
    total = math.fsum(kept)
    if abs(total - 1.0) > _RENORM_TOL:
        raise NotNormalized(f"probabilities sum to {total!r}, expected 1 within 1e-9")
    kept = [p / total for p in kept]
    kept.sort(reverse=True)
    return SchmidtVector(probs=tuple(kept), rank=len(kept))


@dataclass(frozen=True)
class Level:
    """One group of equal eigenvalues of a tensor-power spectrum."""

    log2_eigenvalue: float
    multiplicity: int
    cumulative_count: int


@dataclass(frozen=True, eq=False)
class LeveledSpectrum:
    """Sorted spectrum of ``(Tr_B psi)^{(x)n}`` stored per level.

    ``prefix_log2_mass[i]`` is log2 of the total eigenvalue mass of levels
    ``0..i``; ``prefix_log2_sqrt_mass`` holds the analogous sums of square
    roots of eigenvalues.  ``suffix_log2_mass`` has one trailing ``-inf``
    sentinel so ``suffix_log2_mass[i]`` is always the mass of levels ``i..``.
    Instances are immutable; every query below is pure and safe to call
    concurrently.
    """

    base: SchmidtVector
    copies: int
    levels: tuple[Level, ...]
    cumulative_counts: tuple[int, ...]
    log2_eigenvalues: np.ndarray
    prefix_log2_mass: np.ndarray
    prefix_log2_sqrt_mass: np.ndarray
    suffix_log2_mass: np.ndarray

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    @property
    def total_count(self) -> int:
        return self.cumulative_counts[-1]


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _multinomial(n: int, exps: Sequence[int]) -> int:
    result = 1
    remaining = n
    for e in exps:
        result *= math.comb(remaining, e)
        remaining -= e
    return result


def _distinct_groups(sv: SchmidtVector) -> tuple[list[float], list[int]]:
    """Distinct probability values (by exact float equality) and group sizes."""
    values: list[float] = []
    sizes: list[int] = []
    for p in sv.probs:
        if values and p == values[-1]:
            sizes[-1] += 1
        else:
            values.append(p)
            sizes.append(1)
    return values, sizes


def _enumerate_levels(
    sv: SchmidtVector, n: int
) -> list[tuple[float, tuple[int, ...], int]]:
    """(log2 eigenvalue, exponent vector, multiplicity) per level, sorted.

    The multiplicity of exponent vector e over distinct values with group
    sizes g is multinomial(n; e) * prod_i g_i^(e_i): choose which tensor
    factors fall in each value class, then which of the g_i equal entries
    each factor uses.  Numerically equal eigenvalues from different exponent
    vectors are deliberately kept separate; every downstream quantity
    depends only on the eigenvalue multiset, and the exponent vector gives a
    deterministic secondary sort key.
    """
    values, sizes = _distinct_groups(sv)
    d = len(values)
    log2_values = [math.log2(v) for v in values]
    entries: list[tuple[float, tuple[int, ...], int]] = []
    if d == 1:
        entries.append((n * log2_values[0], (n,), sizes[0] ** n))
    elif d == 2:
        # Binomial ladder: mult(k) = C(n,k) * g1^(n-k) * g2^k, updated by an
        # exact integer ratio per step.
        g1, g2 = sizes
        lv1, lv2 = log2_values
        mult = g1**n
        for k in range(n + 1):
            entries.append(((n - k) * lv1 + k * lv2, (n - k, k), mult))
            if k < n:
                mult = mult * (n - k) * g2 // ((k + 1) * g1)
    else:
        for exps in _compositions(n, d):
            mult = _multinomial(n, exps)
            for g, e in zip(sizes, exps):
                if g > 1 and e:
                    mult *= g**e
            log2_eig = math.fsum(e * lv for e, lv in zip(exps, log2_values))
            entries.append((log2_eig, exps, mult))
    entries.sort(key=lambda item: (-item[0], item[1]))
    return entries


def power_spectrum(
    sv: SchmidtVector, n: int, *, max_levels: int = DEFAULT_MAX_LEVELS
) -> LeveledSpectrum:
    """Leveled spectrum of the n-fold tensor power of ``diag(sv.probs)``.

    Raises
    ------
    RankTooLargeForN
        If the number of levels, C(n + d - 1, d - 1) for d distinct
        probability values, exceeds ``max_levels``.
    """
    if n < 0:
        raise ValueError("copy count must be non-negative")
    d = len(_distinct_groups(sv)[0])
    n_levels = math.comb(n + d - 1, d - 1)
    if n_levels > max_levels:
        raise RankTooLargeForN(
            f"{n_levels} levels for rank {sv.rank} at n={n}, limit {max_levels}"
        )

    entries = _enumerate_levels(sv, n)
    levels: list[Level] = []
    cumcounts: list[int] = []
    running = 0
    for log2_eig, _exps, mult in entries:
        running += mult
        levels.append(Level(log2_eig, mult, running))
        cumcounts.append(running)
    if running != sv.rank**n:
        raise ArithmeticError("level multiplicities do not sum to rank^n")

    log2_eigs = np.array([lv.log2_eigenvalue for lv in levels], dtype=np.float64)
    log2_mults = np.array([log2_int(lv.multiplicity) for lv in levels], dtype=np.float64)
    level_log2_mass = log2_mults + log2_eigs
    level_log2_sqrt = log2_mults + 0.5 * log2_eigs

    prefix_mass = np.logaddexp2.accumulate(level_log2_mass)
    prefix_sqrt = np.logaddexp2.accumulate(level_log2_sqrt)
    suffix = np.empty(len(levels) + 1, dtype=np.float64)
    suffix[-1] = NEG_INF
    suffix[:-1] = np.logaddexp2.accumulate(level_log2_mass[::-1])[::-1]
    if abs(prefix_mass[-1]) > _MASS_GUARD:
        raise ArithmeticError("spectrum mass drifted from 1; construction is broken")

    for arr in (log2_eigs, prefix_mass, prefix_sqrt, suffix):
        arr.flags.writeable = False
    return LeveledSpectrum(
        base=sv,
        copies=n,
        levels=tuple(levels),
        cumulative_counts=tuple(cumcounts),
        log2_eigenvalues=log2_eigs,
        prefix_log2_mass=prefix_mass,
        prefix_log2_sqrt_mass=prefix_sqrt,
        suffix_log2_mass=suffix,
    )


def _locate(ls: LeveledSpectrum, count: int) -> int:
    """Index of the level containing the ``count``-th sorted entry (1-based)."""
    return bisect_left(ls.cumulative_counts, count)


def log2_prefix_mass(ls: LeveledSpectrum, count: int) -> float:
    """log2 of the sum of the top ``count`` eigenvalues; clamps beyond total."""
    if count <= 0:
        return NEG_INF
    if count >= ls.total_count:
        return float(ls.prefix_log2_mass[-1])
    idx = _locate(ls, count)
    if count == ls.cumulative_counts[idx]:
        return float(ls.prefix_log2_mass[idx])
    before = ls.cumulative_counts[idx - 1] if idx > 0 else 0
    partial = log2_int(count - before) + ls.log2_eigenvalues[idx]
    if idx == 0:
        return float(partial)
    return float(np.logaddexp2(ls.prefix_log2_mass[idx - 1], partial))


def log2_prefix_sqrt_mass(ls: LeveledSpectrum, count: int) -> float:
    """log2 of the sum of sqrt(eigenvalue) over the top ``count`` entries."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > ls.total_count:
        raise CountExceedsTotal(f"count {count} exceeds total {ls.total_count}")
    if count == 0:
        return NEG_INF
    idx = _locate(ls, count)
    if count == ls.cumulative_counts[idx]:
        return float(ls.prefix_log2_sqrt_mass[idx])
    before = ls.cumulative_counts[idx - 1] if idx > 0 else 0
    partial = log2_int(count - before) + 0.5 * ls.log2_eigenvalues[idx]
    if idx == 0:
        return float(partial)
    return float(np.logaddexp2(ls.prefix_log2_sqrt_mass[idx - 1], partial))


def log2_tail_mass(ls: LeveledSpectrum, count: int) -> float:
    """log2 of the eigenvalue mass strictly after the top ``count`` entries."""
    if count <= 0:
        return float(ls.suffix_log2_mass[0])
    if count >= ls.total_count:
        return NEG_INF
    idx = _locate(ls, count)
    if count == ls.cumulative_counts[idx]:
        return float(ls.suffix_log2_mass[idx + 1])
    remaining = log2_int(ls.cumulative_counts[idx] - count) + ls.log2_eigenvalues[idx]
    return float(np.logaddexp2(remaining, ls.suffix_log2_mass[idx + 1]))


def prefix_mass(ls: LeveledSpectrum, count: int) -> float:
    """Sum of the top ``count`` sorted eigenvalues, in [0, 1].

    Counts beyond the total clamp to the full mass.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    return min(1.0, _exp2(log2_prefix_mass(ls, count)))


def prefix_sqrt_mass(ls: LeveledSpectrum, count: int) -> float:
    """Sum of sqrt(eigenvalue) over the top ``count`` entries.

    The linear value overflows to inf for very large tensor powers; use
    :func:`log2_prefix_sqrt_mass` there.
    """
    return _exp2(log2_prefix_sqrt_mass(ls, count))


def level_boundaries(ls: LeveledSpectrum) -> list[tuple[int, float]]:
    """Candidate cut positions for the flatten-index search.

    Returns ``(cut, log2 eigenvalue of the entry just after the cut)`` pairs:
    position 0 plus each level's cumulative count, the final pair carrying a
    ``-inf`` eigenvalue because nothing follows the last level.
    """
    pairs = [(0, float(ls.log2_eigenvalues[0]))]
    for i, cum in enumerate(ls.cumulative_counts):
        nxt = float(ls.log2_eigenvalues[i + 1]) if i + 1 < ls.num_levels else NEG_INF
        pairs.append((cum, nxt))
    return pairs


def boundary_index_below(ls: LeveledSpectrum, limit: int) -> int:
    """Largest ``i`` such that the ``i``-th boundary cut is <= ``limit``.

    Boundary ``i`` keeps the first ``i`` full levels, i.e. cut position 0 for
    ``i = 0`` and ``cumulative_counts[i-1]`` otherwise.
    """
    return bisect_right(ls.cumulative_counts, limit)


def boundary_cut(ls: LeveledSpectrum, index: int) -> int:
    """Cut position (number of kept entries) of boundary ``index``."""
    return 0 if index == 0 else ls.cumulative_counts[index - 1]
