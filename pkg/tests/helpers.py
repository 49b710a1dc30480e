import json

from app.models.bifurcation import BifurcationPoint
from app.models.branch import Branch, BranchPoint, Termination
from app.models.field import ModelParams, SpectralField
from app.services.bifurcation_service import BifurcationService

R, S = 0.5, 1.5


def params(eps: float) -> ModelParams:
    return ModelParams(r=R, s=S, eps=eps)


def synthetic_point(eps: float, u: SpectralField, index: int, l2: float = 1.0,
                    jac_min_sv: float = 1.0, zero_count: int = 2, det_sign: int = 1) -> BranchPoint:
    return BranchPoint(eps=eps, u=u, arclength=float(index), l2=l2, jac_min_sv=jac_min_sv,
                       zero_count=zero_count, det_sign=det_sign)


def synthetic_branch(eps_values, modes: int = 4, k: int = 1, termination=Termination.MAX_STEPS,
                     seeded: bool = True, **point_kwargs) -> Branch:
    seed: BifurcationPoint = BifurcationService().make_point(k, R, S, modes) if seeded else None
    u = SpectralField.mode(k, modes, 0.5)
    points = [synthetic_point(eps, u, i, **point_kwargs) for i, eps in enumerate(eps_values)]
    return Branch(points=tuple(points), r=R, s=S, termination=termination, seed=seed, label="synthetic")


def small_run_config(output_dir, **overrides) -> dict:
    """A run config small enough for unit tests: M = 16, a few steps per branch"""
    config = {
        "schema_version": 1,
        "r": R,
        "s": S,
        "modes": 16,
        "branches": [{"k": 1, "t0": 0.05, "direction": "both"}],
        "trivial": {"eps_start": 1.2, "eps_stop": 0.9},
        "continuation": {
            "ds0": 0.01,
            "ds_min": 1e-6,
            "ds_max": 0.05,
            "max_steps": 5,
            "newton": {"tol_inf": 1e-10},
        },
        "output_dir": str(output_dir),
        "profiles_per_branch": 3,
    }
    config.update(overrides)
    return config


def write_config(path, config: dict):
    path.write_text(json.dumps(config, indent=2))
    return path
