import math

import mpmath as mp
import pytest
from pydantic import ValidationError

from app.schemas.detection_schemas import JointClickDistribution, LinkParams
from app.schemas.photon_schemas import EmpiricalSource, PoissonianSource, ThermalSource
from app.services.detection_service import (
    apply_dark_counts,
    click_probabilities_no_dark,
    dark_count_probability,
    fibre_transmission,
    fold_crosstalk,
    ideal_click_probability,
    joint_click_distribution,
    marginal_click_probabilities,
)
from app.utils.errors import DomainError

LAMBDAS = (1e-6, 1e-3, 0.1, 1.0, 5.0, 10.0)
ETAS = tuple(round(0.05 * k, 2) for k in range(1, 21))
QS = (0.0, 3.9e-8, 1e-3, 0.1)


def _poisson_closed_forms(lam, eta, q):
    """Cells (P00, P0c, Pcc) written out directly, in extended precision."""
    with mp.workdps(40):
        lam, eta, q = mp.mpf(lam), mp.mpf(eta), mp.mpf(q)
        keep = 1 - q
        p00 = keep**2 * mp.exp(-lam * eta * (2 - eta))
        p0c = keep * mp.exp(-lam * eta) - p00
        pcc = 1 - 2 * keep * mp.exp(-lam * eta) + p00
        return float(p00), float(p0c), float(pcc)


def test_ideal_click_probability(empirical_source):
    assert ideal_click_probability(PoissonianSource(mean_pairs=0.5)) == pytest.approx(
        1.0 - math.exp(-0.5), rel=1e-15
    )
    assert ideal_click_probability(ThermalSource(mean_pairs=1.0)) == 0.5
    assert ideal_click_probability(EmpiricalSource(probs=(1.0,))) == 0.0
    assert ideal_click_probability(empirical_source) == pytest.approx(0.5)


def test_dark_count_probability():
    assert dark_count_probability(300.0, 130e-12) == pytest.approx(3.9e-8, rel=1e-12)
    assert dark_count_probability(300.0, 1e-9) == 3e-7
    assert dark_count_probability(0.0, 1e-9) == 0.0


def test_dark_count_probability_rejects_bad_inputs():
    with pytest.raises(DomainError):
        dark_count_probability(2e9, 1e-9)
    with pytest.raises(DomainError):
        dark_count_probability(-1.0, 1e-9)


def test_fold_crosstalk():
    link = fold_crosstalk(0.8, 1e-6, 0.1, 0.01)
    assert link.eta == pytest.approx(0.72)
    assert link.q == pytest.approx(1e-6 + 8e-4)

    saturated = fold_crosstalk(1.0, 0.0, 1.0, 0.5)
    assert saturated.eta == 0.0
    assert saturated.q == 0.5


def test_fold_crosstalk_rejects_bad_fraction():
    with pytest.raises(DomainError):
        fold_crosstalk(0.8, 0.0, 1.5, 0.1)


def test_link_from_components():
    link = LinkParams.from_components(
        detector_efficiency=0.5, transmission_efficiency=0.8, dark_rate=300.0, bin_width=1e-9
    )
    assert link.eta == pytest.approx(0.4)
    assert link.q == pytest.approx(3e-7)


def test_link_rejects_out_of_range():
    with pytest.raises(ValidationError):
        LinkParams(eta=1.2, q=0.0)
    with pytest.raises(ValidationError):
        LinkParams(eta=0.5, q=-1e-3)


def test_fibre_transmission():
    assert fibre_transmission(0.0, 0.2) == 1.0
    assert fibre_transmission(10.0, 0.2) == pytest.approx(10.0**-0.2)
    with pytest.raises(DomainError):
        fibre_transmission(-1.0, 0.2)


def test_lossless_poisson_has_no_single_clicks():
    lam = 0.7
    pi = click_probabilities_no_dark(PoissonianSource(mean_pairs=lam), 1.0)

    assert pi.p0c == 0.0
    assert pi.p00 == pytest.approx(math.exp(-lam), rel=1e-15)
    assert pi.pcc == pytest.approx(-math.expm1(-lam), rel=1e-14)


def test_lossy_poisson_cells_match_direct_sum():
    lam, eta = 1.0, 0.8
    pi = click_probabilities_no_dark(PoissonianSource(mean_pairs=lam), eta)

    assert pi.p00 == pytest.approx(math.exp(-0.96), rel=1e-14)
    assert pi.p0c == pytest.approx(math.exp(-0.8) - math.exp(-0.96), rel=1e-12)


@pytest.mark.parametrize(
    "dist",
    [
        PoissonianSource(mean_pairs=3.0),
        ThermalSource(mean_pairs=3.0),
        EmpiricalSource(probs=(0.5, 0.3, 0.15, 0.05)),
    ],
)
def test_zero_efficiency_never_clicks(dist):
    pi = click_probabilities_no_dark(dist, 0.0)
    assert pi.p00 == pytest.approx(1.0, abs=1e-15)
    assert pi.p0c == pytest.approx(0.0, abs=1e-15)
    assert pi.pcc == pytest.approx(0.0, abs=1e-15)


def test_apply_dark_counts_examples():
    pi = JointClickDistribution(p00=0.9, p0c=0.04, pcc=0.02)

    assert apply_dark_counts(pi, 0.0) == pi

    noisy = apply_dark_counts(pi, 0.1)
    assert noisy.p00 == pytest.approx(0.729)
    assert noisy.p0c == pytest.approx(0.117)
    assert noisy.pcc == pytest.approx(0.037)

    dark = apply_dark_counts(JointClickDistribution(p00=1.0, p0c=0.0, pcc=0.0), 1.0)
    assert dark.pcc == 1.0
    assert dark.p00 == 0.0


def test_dark_counts_scale_covariance():
    pi = click_probabilities_no_dark(PoissonianSource(mean_pairs=0.5), 0.6)
    noisy = apply_dark_counts(pi, 0.2)

    assert noisy.covariance == pytest.approx(0.64 * pi.covariance, rel=1e-15)
    assert noisy.covariance == pytest.approx(
        noisy.p00 * noisy.pcc - noisy.p0c**2, rel=1e-10
    )


def test_joint_click_distribution_examples():
    ideal = joint_click_distribution(
        PoissonianSource(mean_pairs=math.log(2.0)), LinkParams(eta=1.0, q=0.0)
    )
    assert ideal.p00 == pytest.approx(0.5, rel=1e-15)
    assert ideal.p0c == 0.0
    assert ideal.pcc == pytest.approx(0.5, rel=1e-15)

    dark_only = joint_click_distribution(
        PoissonianSource(mean_pairs=0.0), LinkParams(eta=0.8, q=0.5)
    )
    assert dark_only.as_tuple() == pytest.approx((0.25, 0.25, 0.25, 0.25))


def test_joint_is_symmetric_and_normalised(typical_link):
    for dist in (PoissonianSource(mean_pairs=2.0), ThermalSource(mean_pairs=2.0)):
        joint = joint_click_distribution(dist, typical_link)
        assert joint.pc0 == joint.p0c
        assert sum(joint.as_tuple()) == pytest.approx(1.0, abs=1e-12)


def test_joint_rejects_unnormalised_cells():
    with pytest.raises(ValidationError):
        JointClickDistribution(p00=0.5, p0c=0.2, pcc=0.2)


def test_joint_rejects_inconsistent_covariance():
    with pytest.raises(ValidationError):
        JointClickDistribution(p00=0.25, p0c=0.25, pcc=0.25, covariance=0.2)

    explicit = JointClickDistribution(p00=0.25, p0c=0.25, pcc=0.25, covariance=0.0)
    assert explicit.covariance == 0.0


def test_poisson_joint_matches_closed_forms_on_grid():
    for lam in LAMBDAS:
        for eta in ETAS:
            for q in QS:
                joint = joint_click_distribution(
                    PoissonianSource(mean_pairs=lam), LinkParams(eta=eta, q=q)
                )
                p00, p0c, pcc = _poisson_closed_forms(lam, eta, q)
                assert joint.p00 == pytest.approx(p00, rel=1e-12)
                assert joint.p0c == pytest.approx(p0c, rel=1e-12)
                assert joint.pcc == pytest.approx(pcc, rel=1e-12)


def test_poisson_marginal_on_grid():
    for lam in LAMBDAS:
        for eta in ETAS:
            for q in QS:
                joint = joint_click_distribution(
                    PoissonianSource(mean_pairs=lam), LinkParams(eta=eta, q=q)
                )
                no_click, click = marginal_click_probabilities(joint)
                assert no_click == pytest.approx((1.0 - q) * math.exp(-lam * eta), rel=1e-12)
                assert no_click + click == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("dist", [PoissonianSource(mean_pairs=1.0), ThermalSource(mean_pairs=1.0)])
def test_coincidences_grow_with_efficiency(dist):
    values = [click_probabilities_no_dark(dist, eta).pcc for eta in ETAS]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_empirical_matches_closed_form_thermal():
    dist = ThermalSource(mean_pairs=1.0)
    table = EmpiricalSource(
        probs=tuple(0.5 ** (m + 1) for m in range(60)) + (0.5**60,)
    )
    for eta in (0.2, 0.6, 1.0):
        a = click_probabilities_no_dark(dist, eta)
        b = click_probabilities_no_dark(table, eta)
        assert b.as_tuple() == pytest.approx(a.as_tuple(), abs=1e-15)
        assert b.covariance == pytest.approx(a.covariance, rel=1e-10)
