import math
from pathlib import Path
from typing import Iterator

import numpy as np
from pydantic import ValidationError
from scipy.special import gammaln

from app.config.config import settings
from app.config.logging import logger
from app.schemas.photon_schemas import (
    EmpiricalSource,
    PairDistribution,
    PoissonianSource,
    ThermalSource,
)
from app.utils.errors import ConfigError, DomainError, require_unit_interval


# ───────────────────────────────────────────────
# Pair-number probabilities
# ───────────────────────────────────────────────
def pair_probability(dist: PairDistribution, m: int) -> float:
    """
    Probability P(m) that the source emits ``m`` pairs in one outcome slot.

    Poissonian and thermal masses are evaluated in the log domain so that
    large ``m`` does not overflow.
    """
    if m < 0:
        raise DomainError(f"pair count must be non-negative, got {m}")

    match dist:
        case PoissonianSource(mean_pairs=lam):
            if lam == 0.0:
                return 1.0 if m == 0 else 0.0
            return math.exp(m * math.log(lam) - lam - gammaln(m + 1))
        case ThermalSource(mean_pairs=lam):
            if lam == 0.0:
                return 1.0 if m == 0 else 0.0
            return math.exp(m * math.log(lam) - (m + 1) * math.log1p(lam))
        case EmpiricalSource(probs=probs):
            return probs[m] if m < len(probs) else 0.0
    raise DomainError(f"unsupported pair distribution {dist!r}")


def tail_bound(dist: PairDistribution, m: int) -> float:
    """Upper bound on the probability of more than ``m`` pairs."""
    match dist:
        case PoissonianSource(mean_pairs=lam):
            # geometric majorant of the Poisson tail, valid once m + 2 > lambda
            if m + 2 <= lam:
                return 1.0
            return pair_probability(dist, m + 1) / (1.0 - lam / (m + 2))
        case ThermalSource(mean_pairs=lam):
            return (lam / (1.0 + lam)) ** (m + 1)
        case EmpiricalSource(probs=probs):
            return math.fsum(probs[m + 1 :])
    raise DomainError(f"unsupported pair distribution {dist!r}")


def iter_pair_probabilities(
    dist: PairDistribution, tail: float | None = None
) -> Iterator[float]:
    """Yield P(0), P(1), ... until the remaining tail is bounded by ``tail``."""
    if tail is None:
        tail = settings.TAIL_PROBABILITY
    if isinstance(dist, EmpiricalSource):
        yield from dist.probs
        return

    for m in range(settings.EMPIRICAL_MAX_TERMS):
        yield pair_probability(dist, m)
        if tail_bound(dist, m) < tail:
            return
    logger.warning(
        "pair_series_truncated_at_cap",
        source=dist.describe(),
        terms=settings.EMPIRICAL_MAX_TERMS,
    )


def to_empirical(
    dist: PairDistribution, tail: float | None = None
) -> EmpiricalSource:
    """Truncate a closed-form source into an explicit probability table."""
    if isinstance(dist, EmpiricalSource):
        return dist
    if tail is None:
        tail = settings.TRUNCATION_TAIL
    return EmpiricalSource(probs=tuple(iter_pair_probabilities(dist, tail)))


def mean_pairs(dist: PairDistribution) -> float:
    match dist:
        case PoissonianSource(mean_pairs=lam) | ThermalSource(mean_pairs=lam):
            return lam
        case EmpiricalSource(probs=probs):
            return math.fsum(m * p for m, p in enumerate(probs))
    raise DomainError(f"unsupported pair distribution {dist!r}")


# ───────────────────────────────────────────────
# Lossy moment generating function
# ───────────────────────────────────────────────
def mgf_lossy(dist: PairDistribution, eta: float, mu: float, xi: float) -> float:
    """
    M_loss(mu, xi) = sum_m P(m) (1 - eta*mu)^m (1 - eta*xi)^m.

    Both arms see the same efficiency and each pair puts one photon in each arm.
    """
    require_unit_interval("eta", eta)
    require_unit_interval("mu", mu)
    require_unit_interval("xi", xi)

    match dist:
        case PoissonianSource(mean_pairs=lam):
            return math.exp(-eta * lam * (mu + xi - eta * mu * xi))
        case ThermalSource(mean_pairs=lam):
            return 1.0 / (1.0 + eta * lam * (mu + xi - eta * mu * xi))
        case EmpiricalSource(probs=probs):
            base = (1.0 - eta * mu) * (1.0 - eta * xi)
            powers = np.power(base, np.arange(len(probs), dtype=float))
            return math.fsum(np.asarray(probs) * powers)
    raise DomainError(f"unsupported pair distribution {dist!r}")


# ───────────────────────────────────────────────
# Empirical distribution files
# ───────────────────────────────────────────────
def load_empirical(path: Path | str) -> EmpiricalSource:
    """
    Read one probability per line (index = pair count from 0).

    Text after ``#`` is a comment; blank lines are skipped.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read probability file {path}: {e}") from e

    probs: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            probs.append(float(line))
        except ValueError:
            raise ConfigError(f"not a probability: {line!r}", line=lineno) from None

    try:
        dist = EmpiricalSource(probs=tuple(probs))
    except ValidationError as e:
        raise ConfigError(
            f"{path}: {e.errors()[0]['msg']}", field="probability_file"
        ) from e

    logger.debug("empirical_distribution_loaded", path=str(path), terms=len(probs))
    return dist
