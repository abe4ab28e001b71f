"""Experiment configuration (one JSON document) and process environment (.env)."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from osnls.analysis import AdmissiblePair, admissible_pair
from osnls.errors import ConfigError, InvalidParamsError
from osnls.forcing import ThetaProfile, profile_from_dict, profile_to_dict
from osnls.grid import GridSpec
from osnls.initial_data import DEFAULT_DESCRIPTOR, normalize_descriptor
from osnls.integrator import DEFAULT_SPECTRAL_TAIL_TOL, SolverParams
from osnls.nonlinearity import EXPONENTIAL, NonlinearityKind, kind_from_dict, kind_to_dict

PROJECT_ROOT = Path(__file__).resolve().parent.parent

MIN_OMEGAS = 3
DEFAULT_PAIRS = (4.0, math.inf)
DEFAULT_INEQUALITY_GRID = GridSpec(256, 256, 12.0, 12.0)

CONFIG_KEYS = {
    "grid",
    "initial_data",
    "profile",
    "nonlinearity",
    "omegas",
    "t_end",
    "dt",
    "save_stride",
    "pairs",
    "output_dir",
    "seed",
    "allow_supercritical",
    "allow_negative_average",
    "grad_warn_threshold",
    "spectral_tail_tol",
    "duhamel_spacing",
    "inequality_grid",
}
REQUIRED_KEYS = ("grid", "profile", "omegas")


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridSpec
    profile: ThetaProfile
    omegas: List[float]
    initial_data: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_DESCRIPTOR))
    nonlinearity: NonlinearityKind = EXPONENTIAL
    t_end: float = 1.0
    dt: float = 5e-4
    save_stride: int = 16
    pairs: List[AdmissiblePair] = field(default_factory=lambda: [admissible_pair(q=q) for q in DEFAULT_PAIRS])
    output_dir: Path = Path("output")
    seed: int = 0
    allow_supercritical: bool = False
    allow_negative_average: bool = False
    grad_warn_threshold: float = 1.0
    spectral_tail_tol: Optional[float] = DEFAULT_SPECTRAL_TAIL_TOL
    duhamel_spacing: Optional[float] = None
    inequality_grid: GridSpec = DEFAULT_INEQUALITY_GRID

    def solver_params(self, omega: float) -> SolverParams:
        try:
            return SolverParams(
                dt=self.dt,
                t_end=self.t_end,
                save_stride=self.save_stride,
                omega=omega,
                grad_warn_threshold=self.grad_warn_threshold,
                spectral_tail_tol=self.spectral_tail_tol,
            )
        except InvalidParamsError as e:
            raise ConfigError(f"Invalid solver settings for omega = {omega!r}: {e}") from e


def _grid_from_dict(data: Any, key: str) -> GridSpec:
    if not isinstance(data, dict):
        raise ConfigError(f"{key} must be an object: got {data!r}")
    extra = set(data) - {"nx", "ny", "lx", "ly"}
    if extra:
        raise ConfigError(f"Unknown {key} key(s): {', '.join(sorted(extra))}")
    try:
        return GridSpec(int(data["nx"]), int(data["ny"]), float(data["lx"]), float(data["ly"]))
    except (KeyError, TypeError, ValueError, InvalidParamsError) as e:
        raise ConfigError(f"Invalid {key} {data!r}: {e}") from e


def _pair_from_value(value: Any) -> AdmissiblePair:
    q = math.inf if value in ("inf", "Infinity") else value
    try:
        return admissible_pair(q=float(q))
    except (TypeError, ValueError, InvalidParamsError) as e:
        raise ConfigError(f"Invalid Strichartz exponent q = {value!r}: {e}") from e


def _optional_positive(data: Dict[str, Any], key: str, default: Optional[float]) -> Optional[float]:
    value = data.get(key, default)
    if value is None:
        return None
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{key} must be a number or null: got {value!r}") from e
    if not value > 0:
        raise ConfigError(f"{key} must be > 0: got {value!r}")
    return value


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate a parsed config document; unknown keys and broken invariants raise ConfigError."""
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object: got {type(data).__name__}")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"Unknown config key(s): {', '.join(sorted(unknown))}")
    missing = [k for k in REQUIRED_KEYS if k not in data]
    if missing:
        raise ConfigError(f"Missing required config key(s): {', '.join(missing)}")

    grid = _grid_from_dict(data["grid"], "grid")
    if not isinstance(data["profile"], dict):
        raise ConfigError(f"profile must be an object: got {data['profile']!r}")
    profile = profile_from_dict(data["profile"])
    nonlinearity_raw = data.get("nonlinearity", {"kind": "exponential"})
    if not isinstance(nonlinearity_raw, dict):
        raise ConfigError(f"nonlinearity must be an object: got {nonlinearity_raw!r}")
    nonlinearity = kind_from_dict(nonlinearity_raw)
    initial_data = normalize_descriptor(data.get("initial_data", DEFAULT_DESCRIPTOR))

    try:
        omegas = [float(w) for w in data["omegas"]]
        t_end = float(data.get("t_end", 1.0))
        dt = float(data.get("dt", 5e-4))
        save_stride = data.get("save_stride", 16)
        seed = int(data.get("seed", 0))
        grad_warn_threshold = float(data.get("grad_warn_threshold", 1.0))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid numeric config value: {e}") from e
    if len(omegas) < MIN_OMEGAS:
        raise ConfigError(f"omegas needs >= {MIN_OMEGAS} values: got {omegas!r}")
    if any(w <= 0 for w in omegas) or any(b <= a for a, b in zip(omegas, omegas[1:])):
        raise ConfigError(f"omegas must be positive and strictly increasing: got {omegas!r}")
    if not isinstance(save_stride, int) or isinstance(save_stride, bool) or save_stride < 1:
        raise ConfigError(f"save_stride must be a positive integer: got {save_stride!r}")

    pairs_raw = data.get("pairs", list(DEFAULT_PAIRS))
    if not isinstance(pairs_raw, list):
        raise ConfigError(f"pairs must be a list of q values: got {pairs_raw!r}")
    pairs = [_pair_from_value(v) for v in pairs_raw]

    flags = {}
    for key in ("allow_supercritical", "allow_negative_average"):
        value = data.get(key, False)
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false: got {value!r}")
        flags[key] = value

    config = ExperimentConfig(
        grid=grid,
        profile=profile,
        omegas=omegas,
        initial_data=initial_data,
        nonlinearity=nonlinearity,
        t_end=t_end,
        dt=dt,
        save_stride=save_stride,
        pairs=pairs,
        output_dir=Path(str(data.get("output_dir", "output"))),
        seed=seed,
        grad_warn_threshold=grad_warn_threshold,
        spectral_tail_tol=_optional_positive(data, "spectral_tail_tol", DEFAULT_SPECTRAL_TAIL_TOL),
        duhamel_spacing=_optional_positive(data, "duhamel_spacing", None),
        inequality_grid=(
            _grid_from_dict(data["inequality_grid"], "inequality_grid")
            if "inequality_grid" in data
            else DEFAULT_INEQUALITY_GRID
        ),
        **flags,
    )
    # dt·max ω and the t_end/dt multiple are checked by the solver parameters
    config.solver_params(max(omegas))
    return config


def load_config(path: Path) -> ExperimentConfig:
    """Read and validate a JSON config. I/O errors propagate as OSError."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}") from e
    return config_from_dict(data)


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """JSON form of a config, for report metadata."""
    return {
        "grid": config.grid.to_dict(),
        "initial_data": config.initial_data,
        "profile": profile_to_dict(config.profile),
        "nonlinearity": kind_to_dict(config.nonlinearity),
        "omegas": list(config.omegas),
        "t_end": config.t_end,
        "dt": config.dt,
        "save_stride": config.save_stride,
        "pairs": ["inf" if math.isinf(p.q) else p.q for p in config.pairs],
        "output_dir": str(config.output_dir),
        "seed": config.seed,
        "allow_supercritical": config.allow_supercritical,
        "allow_negative_average": config.allow_negative_average,
        "grad_warn_threshold": config.grad_warn_threshold,
        "spectral_tail_tol": config.spectral_tail_tol,
        "duhamel_spacing": config.duhamel_spacing,
        "inequality_grid": config.inequality_grid.to_dict(),
    }


# --- process environment ------------------------------------------------------


def load_environment() -> None:
    """Load .env from the project root first (works regardless of cwd), then the cwd .env."""
    load_dotenv(PROJECT_ROOT / ".env", override=True)
    load_dotenv()


def sweep_threads() -> int:
    """OSNLS_THREADS, defaulting to the hardware parallelism."""
    raw = os.environ.get("OSNLS_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError as e:
        raise ConfigError(f"OSNLS_THREADS must be a positive integer: got {raw!r}") from e
    if threads < 1:
        raise ConfigError(f"OSNLS_THREADS must be a positive integer: got {raw!r}")
    return threads


def log_level() -> str:
    return os.environ.get("OSNLS_LOG_LEVEL", "INFO").strip().upper() or "INFO"


def slow_tests_enabled() -> bool:
    return os.environ.get("OSNLS_SLOW_TESTS", "").strip() == "1"
