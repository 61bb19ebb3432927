import math
from decimal import Decimal

import numpy as np
from pydantic import ValidationError

from app.schemas.detection_schemas import JointClickDistribution, LinkParams
from app.schemas.photon_schemas import (
    EmpiricalSource,
    PairDistribution,
    PoissonianSource,
    ThermalSource,
)
from app.services.photon_service import pair_probability
from app.utils.errors import DomainError, require_unit_interval


def ideal_click_probability(dist: PairDistribution) -> float:
    """Click probability of a lossless, noiseless threshold detector: 1 - P(0)."""
    match dist:
        case PoissonianSource(mean_pairs=lam):
            return -math.expm1(-lam)
        case ThermalSource(mean_pairs=lam):
            return lam / (1.0 + lam)
        case EmpiricalSource(probs=probs):
            return math.fsum(probs[1:])
    return 1.0 - pair_probability(dist, 0)


def dark_count_probability(rate: float, bin_width: float) -> float:
    """Probability of a dark count in one bin: rate (1/s) times bin width (s)."""
    if not (0.0 <= rate < math.inf and 0.0 <= bin_width < math.inf):
        raise DomainError(
            f"dark rate and bin width must be finite and non-negative, got {rate!r}, {bin_width!r}"
        )
    # decimal product rounded once: 300 and 1e-9 give exactly 3e-07
    q = float(Decimal(repr(float(rate))) * Decimal(repr(float(bin_width))))
    if not q <= 1.0:
        raise DomainError(f"dark_rate * bin_width = {q!r} exceeds 1")
    return q


def fold_crosstalk(
    eta: float, q: float, crosstalk_fraction: float, lam: float
) -> LinkParams:
    """
    Fold leakage between neighbouring modes into the link parameters.

    A fraction of the photons leaves the mode (lower eta) and the same
    fraction leaks in from one equally bright neighbour, which acts like an
    extra dark count of probability crosstalk_fraction * eta * lam.
    """
    require_unit_interval("crosstalk_fraction", crosstalk_fraction)
    if not lam >= 0.0:
        raise DomainError(f"mean pair number must be non-negative, got {lam!r}")
    try:
        return LinkParams(
            eta=eta * (1.0 - crosstalk_fraction),
            q=min(1.0, q + crosstalk_fraction * eta * lam),
        )
    except ValidationError as e:
        raise DomainError(str(e)) from e


# ───────────────────────────────────────────────
# Joint click probabilities
# ───────────────────────────────────────────────
def _no_dark_cells(
    dist: PairDistribution, eta: float
) -> tuple[float, float, float, float]:
    """
    (pi00, pi0c, picc, cov) without dark counts.

    pi00 = M(1,1), pi0c = M(1,0) - M(1,1), picc = 1 - 2M(1,0) + M(1,1) and
    cov = M(1,1) - M(1,0)^2, each arranged so that no two nearly equal
    numbers are subtracted.
    """
    match dist:
        case PoissonianSource(mean_pairs=lam):
            x = lam * eta
            pi00 = math.exp(-x * (2.0 - eta))
            pi0c = math.exp(-x) * -math.expm1(-x * (1.0 - eta))
            cov = math.exp(-2.0 * x) * math.expm1(x * eta)
            picc = math.expm1(-x) ** 2 + cov
            return pi00, pi0c, picc, cov
        case ThermalSource(mean_pairs=lam):
            a = eta * lam
            b = a * (2.0 - eta)
            pi00 = 1.0 / (1.0 + b)
            pi0c = a * (1.0 - eta) / ((1.0 + a) * (1.0 + b))
            picc = (eta * a + a * b) / ((1.0 + a) * (1.0 + b))
            cov = (eta * a + a * a) / ((1.0 + b) * (1.0 + a) ** 2)
            return pi00, pi0c, picc, cov
        case EmpiricalSource(probs=probs):
            p = np.asarray(probs)
            m = np.arange(len(p), dtype=float)
            r = np.power(1.0 - eta, m)
            if eta < 1.0:
                s = -np.expm1(m * math.log1p(-eta))
            else:
                s = (m > 0).astype(float)
            mean = math.fsum(p * r)
            return (
                math.fsum(p * r * r),
                math.fsum(p * r * s),
                math.fsum(p * s * s),
                math.fsum(p * (r - mean) ** 2),
            )
    raise DomainError(f"unsupported pair distribution {dist!r}")


def click_probabilities_no_dark(
    dist: PairDistribution, eta: float
) -> JointClickDistribution:
    """Joint click table for lossy arms and noiseless detectors."""
    require_unit_interval("eta", eta)
    pi00, pi0c, picc, cov = _no_dark_cells(dist, eta)
    return JointClickDistribution(p00=pi00, p0c=pi0c, pcc=min(1.0, picc), covariance=cov)


def apply_dark_counts(pi: JointClickDistribution, q: float) -> JointClickDistribution:
    """
    Add independent dark counts of probability ``q`` to both detectors.

    The no-click indicators are multiplied by independent no-dark-count
    indicators, so the covariance scales by (1 - q)^2.
    """
    require_unit_interval("q", q)
    keep = 1.0 - q
    return JointClickDistribution(
        p00=keep * keep * pi.p00,
        p0c=keep * pi.p0c + keep * q * pi.p00,
        pcc=min(1.0, pi.pcc + 2.0 * q * pi.p0c + q * q * pi.p00),
        covariance=keep * keep * pi.covariance,
    )


def joint_click_distribution(
    dist: PairDistribution, link: LinkParams
) -> JointClickDistribution:
    return apply_dark_counts(click_probabilities_no_dark(dist, link.eta), link.q)


def marginal_click_probabilities(
    joint: JointClickDistribution,
) -> tuple[float, float]:
    """
    (no-click, click) probabilities of one detector; both arms share them.

    The click probability is summed as pc0 + pcc, not taken as
    1 - no-click; the two agree to within 1e-12.
    """
    return joint.p00 + joint.p0c, joint.pc0 + joint.pcc


def fibre_transmission(length_km: float, loss_db_per_km: float) -> float:
    """Transmission of a fibre span with attenuation given in dB/km."""
    if length_km < 0.0 or loss_db_per_km < 0.0:
        raise DomainError("fibre length and attenuation must be non-negative")
    return 10.0 ** (-length_km * loss_db_per_km / 10.0)
