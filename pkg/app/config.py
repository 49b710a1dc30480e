from pydantic_settings import BaseSettings
from typing import Optional


class Settings(BaseSettings):
    # Application
    app_name: str = "Nonlocal KS Continuation"
    log_level: str = "INFO"
    log_format: str = "json"  # json | console

    # Output (OUTPUT_DIR overrides the directory named in a run config)
    output_dir: Optional[str] = None
    default_output_dir: str = "output"

    # Discretization
    modes: int = 128
    grid_factor: int = 16  # dense grid = grid_factor * modes points
    dealias_factor: int = 4  # product grid = dealias_factor * modes points

    # Newton corrector
    newton_tol_inf: float = 1e-4
    newton_max_iter: int = 25
    singular_rel_threshold: float = 1e-14
    armijo_c: float = 1e-4
    armijo_min_step: float = 1.0 / 1024

    # Pseudo-arclength continuation
    ds0: float = 0.02
    ds_min: float = 1e-6
    ds_max: float = 0.1
    max_steps: int = 400
    eps_floor: float = 0.12
    eps_ceiling: float = 2.0
    step_growth: float = 1.3
    growth_after_successes: int = 3
    tangent_rank_tol: float = 1e-12
    instability_energy_fraction: float = 0.01
    trivial_l2_threshold: float = 1e-8

    # Bifurcation
    seed_amplitude: float = 0.05
    singularity_rel_threshold: float = 1e-6

    # Evolution
    evolution_dt: float = 1e-3
    blowup_cap: float = 1e6

    # Diagnostics
    identity_tolerance: float = 1e-6
    identity_tolerance_scale: float = 100.0
    eps_window_margin: float = 0.02
    eps_open_tolerance: float = 1e-8
    apriori_slack: float = 1e-8
    hs_window_delta: float = 0.25
    hs_window_growth: float = 10.0

    class Config:
        env_file = ".env"
        case_sensitive = False


# Global settings instance
settings = Settings()
