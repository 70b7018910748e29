"""
Runtime configuration.
Defaults come from the environment (a local .env is honoured); CLI flags and
HTTP request fields override them per run.
"""
import os
import logging
from dataclasses import dataclass
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for an entry point."""
    level_name = (level or os.getenv("KNOTFORGE_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.INFO), format=LOG_FORMAT)


def allowed_origins() -> List[str]:
    return os.getenv("KNOTFORGE_ALLOWED_ORIGINS", "*").split(",")


@dataclass(frozen=True)
class SynthOptions:
    """Knobs for height synthesis and coordinate reduction."""
    min_margin: float = 1e-3
    lift_factor: float = 2.0
    lift_floor: float = 1.0
    budget: int = 200
    seed: int = 0
    workers: int = 4
    max_sweeps: int = 60
    pattern_budget: int = 8
    solver_tol: float = 1e-9
    root_tol: float = 1e-9


class RunConfig(BaseModel):
    root_tol: float = Field(default_factory=lambda: _env_float("KNOTFORGE_ROOT_TOL", 1e-9), gt=0,
                            description="Absolute accuracy of real-root isolation")
    solver_tol: float = Field(default_factory=lambda: _env_float("KNOTFORGE_SOLVER_TOL", 1e-9), gt=0,
                              description="Residual tolerance for double points")
    min_margin: float = Field(default_factory=lambda: _env_float("KNOTFORGE_MIN_MARGIN", 1e-3), gt=0,
                              description="Smallest accepted relative crossing margin")
    lift_factor: float = Field(default_factory=lambda: _env_float("KNOTFORGE_LIFT_FACTOR", 2.0), gt=0,
                               description="Multiple of |min| added when lifting a denominator")
    lift_floor: float = Field(default_factory=lambda: _env_float("KNOTFORGE_LIFT_FLOOR", 1.0), ge=0,
                              description="Absolute amount added on top of the scaled lift")
    budget: int = Field(default_factory=lambda: _env_int("KNOTFORGE_BUDGET", 200), ge=1,
                        description="Seeded restarts per synthesis")
    seed: int = Field(default_factory=lambda: _env_int("KNOTFORGE_SEED", 0), ge=0,
                      description="Seed for every randomized restart")
    workers: int = Field(default_factory=lambda: _env_int("KNOTFORGE_WORKERS", 4), ge=1,
                         description="Thread pool size for restarts and pattern scans")
    pattern_budget: int = Field(8, ge=1, description="Candidate patterns tried per reduction stage")
    pattern_path: Optional[str] = Field(None, description="Pattern file (JSON)")
    out_path: Optional[str] = Field(None, description="Output file; stdout when omitted")

    def synth_options(self) -> SynthOptions:
        return SynthOptions(
            min_margin=self.min_margin,
            lift_factor=self.lift_factor,
            lift_floor=self.lift_floor,
            budget=self.budget,
            seed=self.seed,
            workers=self.workers,
            pattern_budget=self.pattern_budget,
            solver_tol=self.solver_tol,
            root_tol=self.root_tol,
        )
