"""Tolerance-based numeric rank and randomized generic-rank estimation.

The combinatorial rank of a pattern is exact; floating point needs a cutoff.
``numeric_rank`` counts singular values above a relative threshold with an
absolute floor. The Monte Carlo estimators instantiate random members of a
structure (or a matrix subspace) and report the maximum observed rank: rank
is lower semicontinuous and drops only on null sets, so the maximum over an
absolutely continuous sample is the right estimator of the generic rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .polysys import StructuredPolySystem, _sample_with_rng
from .structural import structural_rank
from .structure import GeneralizedStructure, StructurePattern

__all__ = [
    "RankTolerance",
    "CertificationReport",
    "numeric_rank",
    "generic_rank_randomized",
    "certify_acr",
    "matrix_space_rank",
    "rank_maximizer_sweep",
]

DEFAULT_PASS_THRESHOLD = 0.99


@dataclass(frozen=True)
class RankTolerance:
    """Singular-value cutoff: sigma > max(relative * sigma_1, floor)."""

    relative_threshold: float = 1e-8
    absolute_floor: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.relative_threshold < 1.0) or not np.isfinite(self.relative_threshold):
            raise ValueError("relative_threshold must lie in (0, 1)")
        if self.absolute_floor < 0.0 or not np.isfinite(self.absolute_floor):
            raise ValueError("absolute_floor must be finite and >= 0")

    def to_json_dict(self):
        return {
            "relative_threshold": self.relative_threshold,
            "absolute_floor": self.absolute_floor,
        }


def numeric_rank(matrix, tol: RankTolerance = RankTolerance()) -> int:
    """Number of singular values above the tolerance cutoff."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    sigma = np.linalg.svd(a, compute_uv=False)
    if sigma.size == 0:
        return 0
    cutoff = max(tol.relative_threshold * float(sigma[0]), tol.absolute_floor)
    return int(np.count_nonzero(sigma > cutoff))


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of a Monte Carlo rank experiment.

    ``estimated_rank`` is the maximum rank observed over all trials.
    When ``target_rank`` is set the experiment certifies agreement with that
    value; otherwise agreement counts trials hitting the estimate itself.
    """

    trials: int
    estimated_rank: int
    agreement_count: int
    rank_histogram: dict[int, int]
    seed: int
    tolerance: RankTolerance
    degree: int | None = None
    distribution: str | None = None
    point_domain: str | None = None
    target_rank: int | None = None
    pass_threshold: float | None = None
    passed: bool | None = None

    @property
    def agreement_rate(self):
        return self.agreement_count / self.trials

    def to_json_dict(self):
        d = {
            "trials": self.trials,
            "estimated_rank": self.estimated_rank,
            "agreement_count": self.agreement_count,
            "agreement_rate": self.agreement_rate,
            "histogram": {str(k): v for k, v in sorted(self.rank_histogram.items())},
            "seed": self.seed,
            "tolerance": self.tolerance.to_json_dict(),
        }
        for key in ("degree", "distribution", "point_domain", "target_rank",
                    "pass_threshold", "passed"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        return d


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    # Trial randomness derives from (seed, trial) so concurrent and
    # sequential schedules produce identical reports.
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
    )


def _histogram_report(ranks, seed, tol, target_rank=None, pass_threshold=None, **extra):
    histogram = {}
    for r in ranks:
        histogram[r] = histogram.get(r, 0) + 1
    estimated = max(histogram)
    if target_rank is None:
        agreement = histogram[estimated]
        passed = None
    else:
        agreement = histogram.get(target_rank, 0)
        passed = agreement / len(ranks) >= pass_threshold
    return CertificationReport(
        trials=len(ranks),
        estimated_rank=estimated,
        agreement_count=agreement,
        rank_histogram=histogram,
        seed=seed,
        tolerance=tol,
        target_rank=target_rank,
        pass_threshold=pass_threshold,
        passed=passed,
        **extra,
    )


def generic_rank_randomized(
    structure,
    trials: int = 200,
    degree: int = 2,
    seed: int = 0,
    tol: RankTolerance = RankTolerance(),
    distribution: str = "uniform",
) -> CertificationReport:
    """Estimate the generic rank of a structure by random instantiation.

    Each trial draws a random member of the space and a point uniform on
    [-1, 1]^N, then takes the numeric rank of the Jacobian. Works for
    generalized structures, where the matching bound overestimates.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not isinstance(structure, (StructurePattern, GeneralizedStructure)):
        raise TypeError(f"expected a structure, got {type(structure).__name__}")
    n = structure.num_variables
    ranks = []
    for i in range(trials):
        rng = _trial_rng(seed, i)
        equations = _sample_with_rng(structure, degree, rng, distribution)
        system = StructuredPolySystem(structure, degree, equations,
                                      seed=None, distribution=distribution)
        x = rng.uniform(-1.0, 1.0, n)
        ranks.append(numeric_rank(system.jacobian(x).matrix, tol))
    return _histogram_report(
        ranks, seed, tol,
        degree=degree, distribution=distribution, point_domain="uniform[-1,1]^N",
    )


def certify_acr(
    pattern: StructurePattern,
    trials: int = 1000,
    degree: int = 2,
    seed: int = 0,
    tol: RankTolerance = RankTolerance(),
    distribution: str = "uniform",
    pass_threshold: float = DEFAULT_PASS_THRESHOLD,
) -> CertificationReport:
    """Certify that random members attain the combinatorial rank almost surely.

    Runs the randomized estimator against the pattern's matching rank and
    flags PASS when the agreement rate reaches ``pass_threshold``. This is
    the finite, desk-scale rendering of almost-constant-rank: exceptional
    systems and points form null sets, so disagreements should be rare and
    tolerance-induced.
    """
    if isinstance(pattern, GeneralizedStructure):
        raise StructureError(
            "certification against the matching rank needs a plain pattern; "
            "generalized structures have no exact combinatorial rank"
        )
    target = structural_rank(pattern)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ranks = []
    for i in range(trials):
        rng = _trial_rng(seed, i)
        equations = _sample_with_rng(pattern, degree, rng, distribution)
        system = StructuredPolySystem(pattern, degree, equations,
                                      seed=None, distribution=distribution)
        x = rng.uniform(-1.0, 1.0, pattern.num_variables)
        ranks.append(numeric_rank(system.jacobian(x).matrix, tol))
    return _histogram_report(
        ranks, seed, tol,
        target_rank=target, pass_threshold=pass_threshold,
        degree=degree, distribution=distribution, point_domain="uniform[-1,1]^N",
    )


def matrix_space_rank(
    basis,
    trials: int = 200,
    seed: int = 0,
    tol: RankTolerance = RankTolerance(),
) -> CertificationReport:
    """Generic rank of the span of the given matrices.

    Samples random linear combinations with coefficients uniform on [-1, 1];
    almost every member of a matrix subspace attains the subspace maximum, so
    the histogram exposes the measure-zero failure set empirically.
    """
    mats = [np.asarray(b, dtype=np.float64) for b in basis]
    if not mats:
        raise ValueError("basis must be nonempty")
    shape = mats[0].shape
    if any(m.shape != shape for m in mats) or len(shape) != 2:
        raise ValueError("basis matrices must share one 2-D shape")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stack = np.stack(mats)
    ranks = []
    for i in range(trials):
        rng = _trial_rng(seed, i)
        weights = rng.uniform(-1.0, 1.0, len(mats))
        ranks.append(numeric_rank(np.tensordot(weights, stack, axes=1), tol))
    return _histogram_report(ranks, seed, tol, distribution="uniform",
                             point_domain="coefficients uniform[-1,1]")


def rank_maximizer_sweep(
    system: StructuredPolySystem,
    maximizer: StructuredPolySystem,
    x,
    c_grid,
    tol: RankTolerance = RankTolerance(),
) -> list[tuple[float, int]]:
    """Rank of D(F + c * Fmax)(x) over a grid of mixing values c.

    Sub-maximal ranks can occur only at roots of a fixed polynomial in c, so
    a fine grid should see them at a vanishing fraction of points.
    Differentiation is linear, so the sweep combines the two Jacobians
    directly instead of building each combined system.
    """
    if system.structure != maximizer.structure:
        raise StructureError("sweep requires systems sharing one structure")
    jf = system.jacobian(x).matrix
    jm = maximizer.jacobian(x).matrix
    return [(float(c), numeric_rank(jf + float(c) * jm, tol)) for c in c_grid]
