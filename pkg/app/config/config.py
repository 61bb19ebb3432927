from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.
    Numerical cut-offs live here so the CLI and the library agree on them.
    """

    # Application settings
    APP_NAME: str = "pairlink-info"
    DEBUG: bool = False
    LOG_LEVEL: str = "WARNING"
    LOG_JSON: bool = True

    # Workers
    DEFAULT_JOBS: int = 1

    # Pair distributions
    EMPIRICAL_MAX_TERMS: int = 10_000
    EMPIRICAL_SUM_TOLERANCE: float = 1e-9
    TAIL_PROBABILITY: float = 1e-15
    TRUNCATION_TAIL: float = 1e-16

    # Optimizer / sweeps
    GOLDEN_SECTION_TOL: float = 1e-6
    DEFAULT_LOG10_LOW: float = -12.0
    DEFAULT_LOG10_HIGH: float = 2.0
    SWEEP_POINTS: int = 200

    # Monte Carlo
    MC_BLOCK_SIZE: int = 1_048_576

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
