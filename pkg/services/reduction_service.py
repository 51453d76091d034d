"""
Reduction Service - the modular state-reduction rule index = L mod n on exact integers,
its uniformity diagnostics and the comparison against the curvature index floor(γ) mod n.
"""
import logging
from typing import List, Sequence, Tuple

import mpmath
import numpy as np
from joblib import Parallel, delayed
from scipy.stats import chisquare

from errors import DomainError
from models import (
    CorrespondenceRecord,
    CorrespondenceReport,
    CurvatureProfile,
    ReductionSample,
    SensitivityMap,
    ThermoParams,
    UniformityResult,
)
from services.geometry_service import GeometryService

logger = logging.getLogger(__name__)

INT64_SAFE = 2**62


def _require_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _partition_histogram(first: int, stop: int, r0: int, step: int, n: int) -> np.ndarray:
    """Histogram of residues (r0 + k·step) mod n for k in [first, stop)."""
    if stop * max(step, 1) + r0 < INT64_SAFE:
        k = np.arange(first, stop, dtype=np.int64)
        residues = (r0 + k * step) % n
    else:
        residues = np.array([(r0 + k * step) % n for k in range(first, stop)], dtype=np.int64)
    return np.bincount(residues, minlength=n)


class ReductionService:
    """Service for the L mod n state-reduction rule."""

    @staticmethod
    def index_mod(L: int, n: int) -> int:
        """Exact Euclidean remainder: L − n·k with the result in [0, n)."""
        L = _require_int("L", L)
        n = _require_int("n", n)
        if n <= 0:
            raise DomainError(f"n must be >= 1, got {n}")
        if L < 0:
            raise DomainError(f"L must be >= 0, got {L}")
        return L % n

    @staticmethod
    def oracle_remainder(L: int, n: int) -> int:
        """Independent remainder through mpmath with enough digits to hold L exactly."""
        digits = len(str(abs(L))) + len(str(n)) + 10
        with mpmath.workdps(digits):
            big = mpmath.mpf(L)
            quotient = mpmath.floor(big / n)
            return int(big - n * quotient)

    @staticmethod
    def reduce(L: int, n: int, gamma: float) -> ReductionSample:
        return ReductionSample(
            L=L,
            n=n,
            index=ReductionService.index_mod(L, n),
            gamma_index=GeometryService.initial_index(gamma, n),
        )

    @staticmethod
    def uniformity_scan(
        L_start: int,
        count: int,
        n: int,
        stride: int = 1,
        workers: int = 1,
    ) -> UniformityResult:
        """
        Histogram of L mod n over L = L_start + k·stride, k in [0, count), with a chi-square
        test against the uniform distribution (n − 1 degrees of freedom).

        The range is split across `workers` thread partitions merged in range order.
        """
        L_start = _require_int("L_start", L_start)
        count = _require_int("count", count)
        n = _require_int("n", n)
        stride = _require_int("stride", stride)
        if n <= 0:
            raise DomainError(f"n must be >= 1, got {n}")
        if L_start < 0:
            raise DomainError("L_start must be >= 0")
        if stride < 1:
            raise DomainError("stride must be >= 1")
        if count < 10 * n:
            raise DomainError(f"count {count} too small for n={n}: need at least {10 * n}")

        r0, step = L_start % n, stride % n
        workers = max(1, int(workers))
        edges = np.linspace(0, count, workers + 1).astype(np.int64)
        parts = Parallel(n_jobs=workers, prefer="threads")(
            delayed(_partition_histogram)(int(a), int(b), r0, step, n)
            for a, b in zip(edges[:-1], edges[1:])
        )
        histogram = np.sum(parts, axis=0).astype(np.int64)

        if n == 1:
            return UniformityResult(histogram=histogram, chi_square=0.0, p_value=1.0, dof=0)
        result = chisquare(histogram)
        logger.debug("uniformity scan n=%d count=%d chi2=%.4g", n, count, result.statistic)
        return UniformityResult(
            histogram=histogram,
            chi_square=float(result.statistic),
            p_value=float(result.pvalue),
            dof=n - 1,
        )

    @staticmethod
    def sensitivity_map(L: int, n: int, radius: int) -> SensitivityMap:
        """Indices of L + δ for δ in [−radius, radius] and the fraction of steps that change it."""
        L = _require_int("L", L)
        n = _require_int("n", n)
        radius = _require_int("radius", radius)
        if radius < 1:
            raise DomainError(f"radius must be >= 1, got {radius}")
        if n <= 0:
            raise DomainError(f"n must be >= 1, got {n}")
        # Euclidean remainder keeps L + δ < 0 well defined
        entries = tuple((delta, (L + delta) % n) for delta in range(-radius, radius + 1))
        changes = sum(1 for a, b in zip(entries, entries[1:]) if a[1] != b[1])
        return SensitivityMap(L=L, n=n, entries=entries, change_fraction=changes / (2 * radius))

    # ============================================
    # CORRESPONDENCE WITH THE CURVATURE INDEX
    # ============================================

    @staticmethod
    def correspondence_report(
        L_series: Sequence[int],
        n: int,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        times: Sequence[float],
    ) -> CorrespondenceReport:
        """Compare L(t) mod n with floor(γ(t)) mod n point by point. Reports, never asserts."""
        if len(L_series) != len(times):
            raise DomainError(
                f"scale series has {len(L_series)} entries but the time grid has {len(times)}"
            )
        gammas = GeometryService.gamma_values(profile, thermo, np.asarray(times, dtype=float))
        records: List[CorrespondenceRecord] = []
        for t, L, gamma in zip(times, L_series, gammas):
            index = ReductionService.index_mod(L, n)
            gamma_index = GeometryService.initial_index(float(gamma), n)
            records.append(
                CorrespondenceRecord(
                    t=float(t),
                    scale=int(L),
                    index=index,
                    gamma_index=gamma_index,
                    agree=index == gamma_index,
                )
            )
        rate = sum(r.agree for r in records) / len(records) if records else 1.0
        return CorrespondenceReport(records=records, agreement_rate=rate)

    @staticmethod
    def matched_scale_series(
        profile: CurvatureProfile,
        thermo: ThermoParams,
        times: Sequence[float],
        n: int,
        offset_multiple: int = 0,
    ) -> List[int]:
        """L(t) = floor(γ(t)) + m·n, which agrees with the curvature index by construction."""
        gammas = GeometryService.gamma_values(profile, thermo, np.asarray(times, dtype=float))
        series = [int(np.floor(g)) + offset_multiple * n for g in gammas]
        if series and min(series) < 0:
            raise DomainError(
                "matched scale series went negative; raise offset_multiple so floor(γ) + m·n >= 0"
            )
        return series

    @staticmethod
    def independent_scale_series(count: int, seed: int = 0, upper: int = 2**128) -> List[int]:
        """Seeded scales in [0, upper) drawn without reference to the curvature."""
        rng = np.random.default_rng(seed)
        width = max(1, (upper.bit_length() + 7) // 8 + 8)
        return [int.from_bytes(rng.bytes(width), "little") % upper for _ in range(count)]

    @staticmethod
    def random_pairs(count: int, seed: int, max_bits: int = 128) -> List[Tuple[int, int]]:
        """Seeded (L, n) pairs with L < 2**max_bits and 1 <= n < 2**32, for oracle sweeps."""
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(count):
            bits = int(rng.integers(1, max_bits + 1))
            L = int.from_bytes(rng.bytes(max_bits // 8 + 1), "little") % (1 << bits)
            n = int(rng.integers(1, 2**32))
            pairs.append((L, n))
        return pairs
