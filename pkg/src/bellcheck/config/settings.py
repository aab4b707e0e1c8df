import os
from dataclasses import dataclass
from pathlib import Path

# Load the first .env found walking up from the package; real environment wins.
try:
    from dotenv import load_dotenv

    here = Path(__file__).resolve()
    for p in [here.parent, *here.parents[:5]]:
        candidate = p / ".env"
        if candidate.exists():
            load_dotenv(str(candidate), override=False)
            break
except Exception:
    pass

REPO_ROOT = Path(__file__).resolve().parents[3]


def _env_bool(name: str, default: bool) -> bool:
    val = os.getenv(name)
    if val is None:
        return default
    return val.lower() in ("1", "true", "yes", "on")


def _env_float(name: str, default: float) -> float:
    val = os.getenv(name)
    return float(val) if val is not None else default


def _env_int(name: str, default: int) -> int:
    val = os.getenv(name)
    return int(val) if val is not None else default


def _env_str(name: str, default: str) -> str:
    val = os.getenv(name)
    return val if val is not None else default


@dataclass
class Settings:
    # Reproducibility
    seed: int = _env_int("BELLCHECK_SEED", 42)

    # Tolerances
    quantum_tol: float = _env_float("BELLCHECK_QUANTUM_TOL", 1e-12)
    operator_tol: float = _env_float("BELLCHECK_OPERATOR_TOL", 1e-10)
    lp_tol: float = _env_float("BELLCHECK_LP_TOL", 1e-9)

    # Monte Carlo
    mc_lanes: int = _env_int("BELLCHECK_MC_LANES", 1)
    mc_block_size: int = _env_int("BELLCHECK_MC_BLOCK_SIZE", 65536)

    # Cosine model quadrature
    quadrature_nodes: int = _env_int("BELLCHECK_QUADRATURE_NODES", 4096)

    # CHSH search
    grid_steps: int = _env_int("BELLCHECK_GRID_STEPS", 24)
    refine_iters: int = _env_int("BELLCHECK_REFINE_ITERS", 60)

    # Files
    data_dir: str = _env_str("BELLCHECK_DATA_DIR", str(REPO_ROOT / "data" / "instances"))
    audit_log: str = _env_str("BELLCHECK_AUDIT_LOG", "")

    # Runtime
    log_level: str = _env_str("BELLCHECK_LOG_LEVEL", "WARNING")
    degrees: bool = not _env_bool("BELLCHECK_RADIANS", False)
    api_host: str = _env_str("BELLCHECK_API_HOST", "127.0.0.1")
    api_port: int = _env_int("BELLCHECK_API_PORT", 8000)


settings = Settings()
