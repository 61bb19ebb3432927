import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import entr, xlog1py

from app.config.logging import logger
from app.schemas.detection_schemas import JointClickDistribution, LinkParams
from app.schemas.information_schemas import InfoReport
from app.schemas.photon_schemas import PairDistribution, ThermalSource
from app.services.detection_service import (
    apply_dark_counts,
    click_probabilities_no_dark,
    joint_click_distribution,
)
from app.services.photon_service import mean_pairs
from app.utils.errors import DomainError, PairLinkError, require_unit_interval

LN2 = math.log(2.0)
CLAMP_TOL = 1e-12
_SERIES_LIMIT = 1e-2


def binary_entropy(x: float) -> float:
    """H2(x) in bits with 0 log 0 = 0."""
    require_unit_interval("x", x)
    return float((entr(x) + entr(1.0 - x)) / LN2)


def _divergence_term(x: NDArray) -> NDArray:
    """
    (1 + x) ln(1 + x) - x, never negative.

    Small |x| uses the alternating series sum_{n>=2} (-x)^n / (n (n - 1)).
    """
    x = np.maximum(x, -1.0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        series = np.zeros_like(x)
        power = x * x
        for n in range(2, 10):
            series += power / (n * (n - 1))
            power = -power * x
        direct = xlog1py(1.0 + x, x) - x
    return np.where(np.abs(x) < _SERIES_LIMIT, series, direct)


def _mutual_information_cells(
    p00: ArrayLike, p0c: ArrayLike, pcc: ArrayLike, cov: ArrayLike
) -> NDArray:
    """
    Mutual information (bits) of a symmetric 2x2 table.

    Every cell deviates from the product of marginals by +-cov, so the sum
    sum p log(p / pa pb) is rewritten as sum pa pb [(1+x) ln(1+x) - x] with
    x = +-cov / (pa pb); the extra -x terms add up to zero and each
    remaining term is non-negative.
    """
    p00, p0c, pcc, cov = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p00, p0c, pcc, cov))
    )
    no_click = p00 + p0c
    click = p0c + pcc

    total = np.zeros_like(p00)
    for weight, sign, count in (
        (no_click * no_click, 1.0, 1.0),
        (no_click * click, -1.0, 2.0),
        (click * click, 1.0, 1.0),
    ):
        safe = np.where(weight > 0.0, weight, 1.0)
        term = count * weight * _divergence_term(sign * cov / safe)
        total += np.where(weight > 0.0, term, 0.0)
    mi = total / LN2

    bound = (entr(no_click) + entr(click)) / LN2
    overshoot = np.maximum(mi - bound, 0.0)
    if np.any(overshoot > CLAMP_TOL):
        logger.error("mutual_information_above_bound", overshoot=float(overshoot.max()))
        raise PairLinkError("mutual information exceeds the marginal entropy")
    if np.any(overshoot > 0.0):
        logger.debug("mutual_information_clamped", overshoot=float(overshoot.max()))
    return np.clip(mi, 0.0, bound)


def mutual_information(joint: JointClickDistribution) -> float:
    """Shannon mutual information H(A:B) of the joint click table, in bits."""
    return float(
        _mutual_information_cells(joint.p00, joint.p0c, joint.pcc, joint.covariance)
    )


def _validate_link(lam: ArrayLike, eta: float, q: float) -> None:
    if np.any(~(np.asarray(lam, dtype=float) >= 0.0)) or not np.all(np.isfinite(lam)):
        raise DomainError(f"mean pair number must be finite and non-negative, got {lam!r}")
    require_unit_interval("eta", eta)
    require_unit_interval("q", q)


def mutual_information_poisson_array(lam: ArrayLike, eta: float, q: float) -> NDArray:
    """
    Closed-form H(A:B) for a Poissonian source, vectorised over ``lam``.

    With A = (1-q) e^(-lam eta) and B = A^2 e^(lam eta^2) the value equals
    2 H2(A) + B log B + 2 (A-B) log(A-B) + (1-2A+B) log(1-2A+B); the cells
    B, A-B, 1-2A+B and the covariance B - A^2 are each formed without
    cancellation before they are combined.
    """
    _validate_link(lam, eta, q)
    lam = np.asarray(lam, dtype=float)
    if q == 1.0:
        return np.zeros_like(lam)

    log_keep = math.log1p(-q)
    x = lam * eta
    a = np.exp(log_keep - x)
    one_minus_a = -np.expm1(log_keep - x)
    cov = a * a * np.expm1(x * eta)
    b = a * a + cov
    a_minus_b = a * -np.expm1(log_keep - x * (1.0 - eta))
    rest = one_minus_a * one_minus_a + cov
    return _mutual_information_cells(b, a_minus_b, rest, cov)


def mutual_information_poisson(lam: float, eta: float, q: float) -> float:
    return float(mutual_information_poisson_array(lam, eta, q))


def mutual_information_thermal(lam: float, eta: float, q: float) -> float:
    """H(A:B) for a thermal source, from its closed-form generating function."""
    _validate_link(lam, eta, q)
    pi = click_probabilities_no_dark(ThermalSource(mean_pairs=lam), eta)
    return mutual_information(apply_dark_counts(pi, q))


# ───────────────────────────────────────────────
# Figures of merit
# ───────────────────────────────────────────────
def info_per_generated(h_bits: float, lam: float) -> float:
    """I_g: bits per generated pair."""
    if not lam > 0.0:
        raise DomainError(f"information per generated pair needs lambda > 0, got {lam!r}")
    return h_bits / lam


def info_per_detected(h_bits: float, lam: float, eta: float, q: float) -> float:
    """I_d: bits per detected pair, H / (eta^2 lambda + q^2)."""
    denominator = eta * eta * lam + q * q
    if not denominator > 0.0:
        raise DomainError("information per detected pair needs eta^2 lambda + q^2 > 0")
    return h_bits / denominator


def key_bits_for_slots(h_bits: float, slot_count: int) -> float:
    """Length of the shared raw string after ``slot_count`` equiprobable slots."""
    if slot_count < 0:
        raise DomainError(f"slot count must be non-negative, got {slot_count}")
    return slot_count * h_bits


def build_info_report(dist: PairDistribution, link: LinkParams) -> InfoReport:
    lam = mean_pairs(dist)
    h = mutual_information(joint_click_distribution(dist, link))
    return InfoReport(
        mutual_info_bits=h,
        info_per_generated_bits=info_per_generated(h, lam),
        info_per_detected_bits=info_per_detected(h, lam, link.eta, link.q),
        source=dist.describe(),
        mean_pairs=lam,
        link=link,
    )
