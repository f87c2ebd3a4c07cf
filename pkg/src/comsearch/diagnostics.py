"""Population moments of the SBM and numeric checks of the weight conditions.

The population moments are the expectations of the empirical estimates
(ignoring the zero diagonal of X) on a canonical node layout where each
quarter lists its communities contiguously.  Feeding them to
``search_subroutine`` must return the exact membership vector whenever the
community fractions agree across quarters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError, RankDeficient
from .graph import GroundTruth, SbmParams
from .sideinfo import validate_weights


@dataclass(frozen=True)
class PopulationMoments:
    a1: np.ndarray
    a2: np.ndarray
    m1: np.ndarray
    b: np.ndarray
    omega: np.ndarray
    counts: np.ndarray  # (4, k) community counts per quarter
    mu_p1: np.ndarray  # (|P1|, k) membership vectors restricted to P1

    def community_rows(self, i: int) -> np.ndarray:
        """Positions of community ``i`` among the P1 rows."""
        start = int(self.counts[0, :i].sum())
        return np.arange(start, start + int(self.counts[0, i]))


def quarter_counts(alpha, size: int) -> np.ndarray:
    """Largest-remainder apportionment of ``size`` nodes by ``alpha``."""
    alpha = np.asarray(alpha, dtype=np.float64)
    raw = alpha * size
    counts = np.floor(raw + 1e-9).astype(np.int64)
    short = size - counts.sum()
    if short > 0:
        order = np.lexsort((np.arange(alpha.size), -(raw - counts)))
        counts[order[:short]] += 1
    return counts


def population_moments(params: SbmParams, partition_sizes, omega) -> PopulationMoments:
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (params.k,) or not np.all(np.isfinite(omega)):
        raise ParameterError("omega must be a finite length-k vector")
    sizes = [int(s) for s in partition_sizes]
    if len(sizes) != 4 or min(sizes) < 1:
        raise ParameterError("need four positive partition sizes")
    counts = np.array([quarter_counts(params.alpha, s) for s in sizes])
    if (counts == 0).any():
        warnings.warn("some quarter has no members of some community; moments are rank deficient",
                      RankDeficient, stacklevel=2)
    k = params.k
    layout = [np.repeat(np.arange(k), c) for c in counts]

    def restricted(t):
        return np.where(layout[t][:, None] == np.arange(k)[None, :], params.p, params.q)

    mu1, mu2 = restricted(0), restricted(1)
    n1, n3, n4 = sizes[0], sizes[2], sizes[3]
    a1 = mu1[:, layout[2]] / math.sqrt(n3)
    a2 = mu2[:, layout[2]] / math.sqrt(n3)
    m1 = mu1 @ (counts[0] / n1)
    b = (mu1 * (counts[3] / n4 * omega)) @ mu2.T
    return PopulationMoments(a1, a2, m1, b, omega, counts, mu1)


@dataclass(frozen=True)
class ConditionReport:
    target: int
    omega_hat: tuple[float, ...]
    a1_holds: bool
    sigma1: float
    sigma2: float
    sigma_gap: float
    gamma2: float
    a2_ratio: float
    a2_bound: float
    a3_lhs: float
    a3_rhs: float
    xi: float
    # gamma2 uses per-community sample means, not the true conditional means.
    empirical_means: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["omega_hat"] = list(self.omega_hat)
        return d


def evaluate_conditions(params: SbmParams, truth: GroundTruth, weights, target: int = 0) -> ConditionReport:
    """Report the weight-bias, weight-concentration and p/q-separation
    quantities.  Only the bias condition is a verdict; the other two carry
    unknown constants and are reported as numbers."""
    w = validate_weights(weights, truth.n)
    k = truth.k
    if not 0 <= target < k:
        raise IndexError(f"target {target} out of range [0, {k})")
    sizes = truth.sizes()
    omega_hat = np.bincount(truth.assignment, weights=w, minlength=k) / sizes
    others = np.delete(omega_hat, target)
    sigma1 = float(omega_hat[target])
    sigma2 = float(others.max()) if others.size else 0.0
    gap = sigma1 - sigma2
    gamma2 = float(np.abs(w - omega_hat[truth.assignment]).max()) if w.size else 0.0
    a2_ratio = gamma2 / gap if gap > 0 else math.inf

    n = truth.n
    p, q = params.p, params.q
    fr = sizes / n
    a_min, a_max = float(fr.min()), float(fr.max())
    xi = math.sqrt(math.log(math.log(n))) if n > math.e else float("nan")
    d = p - q
    first = a_min ** 4 * d ** 4 / (a_max ** 4 * p ** 4 * xi)
    second = a_min ** 5 * math.sqrt(n) * d ** 5 / (a_max ** 4 * p ** 4.5 * xi) - 1.0
    return ConditionReport(
        target=target,
        omega_hat=tuple(float(x) for x in omega_hat),
        a1_holds=bool((others < sigma1).all()),
        sigma1=sigma1,
        sigma2=sigma2,
        sigma_gap=gap,
        gamma2=gamma2,
        a2_ratio=a2_ratio,
        a2_bound=min(first, second),
        a3_lhs=d ** 2 / (p * math.sqrt(p)),
        a3_rhs=a_max / (a_min ** 2 * math.sqrt(n)),
        xi=xi,
    )
