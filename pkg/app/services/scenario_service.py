from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from app.config.logging import logger
from app.schemas.detection_schemas import LinkParams
from app.schemas.optimize_schemas import ObjectiveKind, OptimizationResult, SourceKind
from app.schemas.photon_schemas import PairDistribution, PoissonianSource, ThermalSource
from app.schemas.scenario_schemas import ScenarioConfig, ScenarioEvaluation
from app.services.detection_service import fibre_transmission, fold_crosstalk
from app.services.information_service import build_info_report, key_bits_for_slots
from app.services.optimize_service import maximize_lambda
from app.services.photon_service import load_empirical, mean_pairs
from app.utils.errors import ConfigError, DomainError

SCENARIO_KEYS = frozenset(ScenarioConfig.model_fields)
_OBJECTIVE_ALIASES = {kind.value.lower(): kind.value for kind in ObjectiveKind}


# ───────────────────────────────────────────────
# Scenario files
# ───────────────────────────────────────────────
def parse_scenario(text: str, base_dir: Optional[Path] = None) -> ScenarioConfig:
    """
    Parse ``key = value`` lines (``#`` starts a comment) into a ScenarioConfig.

    Unknown and repeated keys are rejected with their line number; a relative
    ``probability_file`` is resolved against ``base_dir``.
    """
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep or not key:
            raise ConfigError("expected 'key = value'", line=lineno)
        if key not in SCENARIO_KEYS:
            raise ConfigError("unknown key", line=lineno, field=key)
        if key in values:
            raise ConfigError(f"repeats line {lines[key]}", line=lineno, field=key)
        values[key] = value
        lines[key] = lineno

    if "source" in values:
        values["source"] = values["source"].lower()
    if "objective" in values:
        values["objective"] = _OBJECTIVE_ALIASES.get(
            values["objective"].lower(), values["objective"]
        )
    if "probability_file" in values and base_dir is not None:
        values["probability_file"] = str(base_dir / values["probability_file"])

    try:
        return ScenarioConfig.model_validate(values)
    except ValidationError as e:
        error = e.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else None
        raise ConfigError(error["msg"], line=lines.get(field), field=field) from e


def load_scenario(path: Path | str) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario file {path}: {e}") from e
    config = parse_scenario(text, base_dir=path.parent)
    logger.debug("scenario_loaded", path=str(path), name=config.name)
    return config


# ───────────────────────────────────────────────
# Scenario evaluation
# ───────────────────────────────────────────────
def scenario_source(config: ScenarioConfig) -> PairDistribution:
    match config.source:
        case SourceKind.POISSONIAN:
            return PoissonianSource(mean_pairs=config.mean_pairs)
        case SourceKind.THERMAL:
            return ThermalSource(mean_pairs=config.mean_pairs)
        case SourceKind.EMPIRICAL:
            return load_empirical(config.probability_file)


def scenario_link(config: ScenarioConfig, lam: float) -> LinkParams:
    """
    Link parameters with eta = eta_d * eta_l and q = dark rate * bin width.

    Crosstalk is folded in at brightness ``lam``.
    """
    try:
        link = LinkParams.from_components(
            detector_efficiency=config.detector_efficiency,
            transmission_efficiency=config.transmission_efficiency
            * fibre_transmission(config.fibre_length_km, config.fibre_loss_db_per_km),
            dark_rate=config.dark_rate,
            bin_width=config.bin_width,
        )
    except ValidationError as e:
        raise DomainError(str(e)) from e
    if config.crosstalk_fraction > 0.0:
        link = fold_crosstalk(link.eta, link.q, config.crosstalk_fraction, lam)
    return link


def evaluate_scenario(config: ScenarioConfig) -> ScenarioEvaluation:
    dist = scenario_source(config)
    link = scenario_link(config, mean_pairs(dist))
    report = build_info_report(dist, link)
    logger.info(
        "scenario_evaluated",
        name=config.name,
        eta=link.eta,
        q=link.q,
        mutual_info_bits=report.mutual_info_bits,
    )
    return ScenarioEvaluation(
        name=config.name,
        report=report,
        outcome_count=config.outcome_count,
        key_bits=key_bits_for_slots(report.mutual_info_bits, config.outcome_count),
    )


def optimize_scenario(
    config: ScenarioConfig,
    objective: Optional[ObjectiveKind] = None,
    log10_bracket: Optional[tuple[float, float]] = None,
) -> OptimizationResult:
    """
    Optimal brightness for the scenario's link.

    Crosstalk leakage is evaluated at the configured brightness and then held
    fixed during the search.
    """
    if config.source is SourceKind.EMPIRICAL:
        raise DomainError(
            "an empirical source has no brightness parameter to optimise; "
            "use a poissonian or thermal source"
        )
    link = scenario_link(config, config.mean_pairs)
    return maximize_lambda(
        config.source,
        link.eta,
        link.q,
        objective or config.objective,
        log10_bracket,
    )
