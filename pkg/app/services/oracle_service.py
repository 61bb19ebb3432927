"""
Independent verification paths for the analytic pipeline.

Nothing here calls the generating-function code: joints are summed term by
term over the pair distribution, in double or extended precision, or sampled
event by event.
"""

import math
from functools import partial
from typing import Optional

import mpmath as mp
import numpy as np

from app.config.config import settings
from app.config.logging import logger
from app.schemas.detection_schemas import JointClickDistribution
from app.schemas.optimize_schemas import SourceKind
from app.schemas.oracle_schemas import SimulationReport
from app.schemas.photon_schemas import EmpiricalSource, PairDistribution
from app.services.detection_service import apply_dark_counts
from app.services.photon_service import pair_probability
from app.utils.errors import DomainError, require_unit_interval
from app.utils.parallel import run_ordered

TAIL_WARNING = 1e-12


# ───────────────────────────────────────────────
# Truncated direct summation
# ───────────────────────────────────────────────
def joint_by_truncated_sum(
    dist: PairDistribution, eta: float, q: float, max_m: int
) -> JointClickDistribution:
    """
    Joint click table from the direct sums over m <= max_m.

    The mass beyond ``max_m`` is reported as a diagnostic and the partial
    sums are renormalised by the retained mass.
    """
    if max_m < 1:
        raise DomainError(f"max_m must be at least 1, got {max_m}")
    require_unit_interval("eta", eta)
    require_unit_interval("q", q)

    probs = np.array([pair_probability(dist, m) for m in range(max_m + 1)])
    m = np.arange(max_m + 1, dtype=float)
    r = np.power(1.0 - eta, m)
    s = 1.0 - r

    retained = math.fsum(probs)
    tail_mass = max(0.0, 1.0 - retained)
    if tail_mass > TAIL_WARNING:
        logger.warning(
            "truncated_sum_tail_mass", source=dist.describe(), max_m=max_m, tail_mass=tail_mass
        )

    pi = JointClickDistribution(
        p00=math.fsum(probs * r * r) / retained,
        p0c=math.fsum(probs * r * s) / retained,
        pcc=math.fsum(probs * s * s) / retained,
    )
    return apply_dark_counts(pi, q)


def derivative_series_pi_c0(dist: EmpiricalSource, eta: float) -> float:
    """
    pi(c,0) from the derivative series of the generating function.

    sum_{l>=1} (1/l!) (-d/dxi)^l M_loss(1, xi) at xi = 1, expanded term by term
    over the finite support: each m contributes
    P(m) (1-eta)^m sum_{l=1..m} C(m, l) eta^l (1-eta)^(m-l).
    """
    require_unit_interval("eta", eta)
    total = []
    for m, p in enumerate(dist.probs):
        derivatives = math.fsum(
            math.comb(m, l) * eta**l * (1.0 - eta) ** (m - l) for l in range(1, m + 1)
        )
        total.append(p * (1.0 - eta) ** m * derivatives)
    return math.fsum(total)


def mutual_information_extended(
    source_kind: SourceKind,
    lam: float,
    eta: float,
    q: float,
    max_m: int = 200,
    dps: int = 60,
) -> float:
    """
    H(A:B) in bits from truncated sums and the plain definition, in mpmath.

    Used as the reference for the double-precision closed forms at very
    small lambda, where a naive evaluation cancels.
    """
    with mp.workdps(dps):
        lam_, eta_, q_ = mp.mpf(lam), mp.mpf(eta), mp.mpf(q)
        r = 1 - eta_
        pi00 = pi0c = picc = mp.mpf(0)
        for m in range(max_m + 1):
            if source_kind is SourceKind.POISSONIAN:
                p = mp.exp(-lam_) * lam_**m / mp.factorial(m)
            elif source_kind is SourceKind.THERMAL:
                p = lam_**m / (lam_ + 1) ** (m + 1)
            else:
                raise DomainError("extended oracle supports poissonian and thermal sources")
            rm = r**m
            pi00 += p * rm * rm
            pi0c += p * rm * (1 - rm)
            picc += p * (1 - rm) ** 2

        keep = 1 - q_
        cells = {
            "00": keep**2 * pi00,
            "0c": keep * pi0c + keep * q_ * pi00,
            "cc": picc + 2 * q_ * pi0c + q_**2 * pi00,
        }
        no_click = cells["00"] + cells["0c"]
        click = cells["0c"] + cells["cc"]
        marginals = {"0": no_click, "c": click}

        total = mp.mpf(0)
        for (i, j), key in (
            (("0", "0"), "00"),
            (("0", "c"), "0c"),
            (("c", "0"), "0c"),
            (("c", "c"), "cc"),
        ):
            p = cells[key]
            if p > 0:
                total += p * mp.log(p / (marginals[i] * marginals[j]), 2)
        return float(total)


# ───────────────────────────────────────────────
# Monte-Carlo event simulation
# ───────────────────────────────────────────────
def _draw_pairs(dist: PairDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    match dist.kind:
        case "poissonian":
            return rng.poisson(dist.mean_pairs, size)
        case "thermal":
            # P(m) = (1-p)^m p with p = 1 / (1 + lambda)
            return rng.geometric(1.0 / (1.0 + dist.mean_pairs), size) - 1
        case "empirical":
            return rng.choice(len(dist.probs), size=size, p=np.asarray(dist.probs))
    raise DomainError(f"unsupported pair distribution {dist!r}")


def _simulate_block(
    dist: PairDistribution,
    eta: float,
    q: float,
    trials: int,
    seed: int,
    per_photon: bool,
    block_size: int,
    block: int,
) -> tuple[int, int, int, int]:
    """Counts (n00, n0c, nc0, ncc) for one block of an independently seeded stream."""
    size = min(block_size, trials - block * block_size)
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))
    )

    pairs = _draw_pairs(dist, rng, size)
    if per_photon:
        # binomial thinning of each arm's photons
        signal_a = rng.binomial(pairs, eta) > 0
        signal_b = rng.binomial(pairs, eta) > 0
    else:
        survive = 1.0 - np.power(1.0 - eta, pairs)
        signal_a = rng.random(size) < survive
        signal_b = rng.random(size) < survive
    click_a = signal_a | (rng.random(size) < q)
    click_b = signal_b | (rng.random(size) < q)

    ncc = int(np.count_nonzero(click_a & click_b))
    n0c = int(np.count_nonzero(~click_a & click_b))
    nc0 = int(np.count_nonzero(click_a & ~click_b))
    return size - ncc - n0c - nc0, n0c, nc0, ncc


def simulate_events(
    dist: PairDistribution,
    eta: float,
    q: float,
    trials: int,
    seed: int,
    per_photon: bool = False,
    jobs: Optional[int] = None,
) -> SimulationReport:
    """
    Sample ``trials`` outcome slots and count joint click outcomes.

    Trials are cut into fixed blocks of MC_BLOCK_SIZE, block k drawing from
    the stream seeded by (seed, k), so the counts depend on the seed only and
    not on how blocks are spread over workers. Each photon survives with
    probability eta; the default mode draws the arm's aggregate survival
    1 - (1-eta)^m, ``per_photon`` thins the photons binomially.
    """
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    require_unit_interval("eta", eta)
    require_unit_interval("q", q)

    block_size = settings.MC_BLOCK_SIZE
    blocks = -(-trials // block_size)
    counts = run_ordered(
        partial(_simulate_block, dist, eta, q, trials, seed, per_photon, block_size),
        range(blocks),
        jobs,
    )
    n00, n0c, nc0, ncc = (sum(column) for column in zip(*counts))

    logger.info(
        "simulation_completed",
        source=dist.describe(),
        eta=eta,
        q=q,
        trials=trials,
        seed=seed,
        blocks=blocks,
    )
    return SimulationReport(
        n00=n00,
        n0c=n0c,
        nc0=nc0,
        ncc=ncc,
        trials=trials,
        seed=seed,
        per_photon=per_photon,
    )
