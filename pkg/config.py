from __future__ import annotations

from pathlib import Path

from pydantic import computed_field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

BASE_DIR = Path(__file__).resolve().parent


class Settings(BaseSettings):
    # =========================
    # Integrator defaults
    # =========================
    default_tol: float = 1e-10
    default_tmax: float = 200.0
    blowup_radius: float = 1e6
    min_step_factor: float = 1e-13
    max_steps: int = 2_000_000

    # =========================
    # Cycle location
    # =========================
    closure_tol: float = 1e-6
    multiplier_band: float = 1e-3
    bisection_width: float = 1e-6
    secant_tol: float = 1e-10
    star_samples: int = 2048

    # =========================
    # Windows / grids
    # =========================
    # X* of the grid-based sign checks
    sign_window: float = 100.0
    portrait_window: float = 3.0
    grid_points: int = 20_001
    tail_decades: int = 4

    # =========================
    # Quadrature
    # =========================
    quad_inner_tol: float = 1e-12
    quad_outer_tol: float = 1e-10
    quad_panel_width: float = 0.5

    # =========================
    # Hopf scan
    # =========================
    hopf_inner_seed: float = 0.05
    hopf_outer_seed: float = 50.0
    hopf_grid_points: int = 10  # return-map samples per chunk of the outward scan
    hopf_grid_growth: float = 1.15

    # =========================
    # Parallelism (CYCLESCOPE_THREADS)
    # =========================
    threads: int = 4

    @field_validator("threads", mode="before")
    @classmethod
    def _clamp_threads(cls, v):
        try:
            val = int(v)
        except Exception:
            return 4
        return max(1, min(val, 32))

    # =========================
    # LOG Config
    # =========================
    log_level: str = "INFO"
    log_dir: Path = BASE_DIR / "logs"
    log_to_file: bool = True

    @field_validator("log_level", mode="before")
    @classmethod
    def _normalize_log_level(cls, v):
        if v is None:
            return "INFO"
        return str(v).strip().upper()

    @computed_field
    @property
    def spec_dir(self) -> Path:
        return BASE_DIR / "specs"

    model_config = SettingsConfigDict(
        env_file=BASE_DIR / ".env",
        env_prefix="CYCLESCOPE_",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
