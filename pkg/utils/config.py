"""
Run configuration: pydantic models for every tunable piece, with defaults that a
local .env file may override (DECAYLAB_THREADS, DECAYLAB_TOL, DECAYLAB_OUT,
DECAYLAB_LOG_LEVEL).
"""
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils import const

load_dotenv()


def env_defaults() -> Dict[str, Any]:
    return {
        "threads": int(os.getenv("DECAYLAB_THREADS", "1")),
        "tol": float(os.getenv("DECAYLAB_TOL", str(const.DEFAULT_TARGET_ABS_ERROR))),
        "out": os.getenv("DECAYLAB_OUT", "results"),
        "log_level": os.getenv("DECAYLAB_LOG_LEVEL", "WARNING"),
    }


class QuadratureConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    target_abs_error: float = Field(const.DEFAULT_TARGET_ABS_ERROR, gt=0)
    max_panels: int = Field(const.DEFAULT_MAX_PANELS, ge=1)
    truncation_tail_bound: float = Field(const.DEFAULT_TAIL_BOUND, gt=0, lt=1)
    endpoint_rule: Literal["jacobi-weighted", "tanh-sinh"] = "jacobi-weighted"
    panel_order: int = Field(const.DEFAULT_PANEL_ORDER, ge=7)
    # "xi" integrates over the mass variable, "eta" over the energy variable
    form: Literal["xi", "eta"] = "xi"
    phase_per_panel: float = Field(const.DEFAULT_PHASE_PER_PANEL, gt=0)
    max_panel_width: float = Field(const.DEFAULT_MAX_PANEL_WIDTH, gt=0)

    @classmethod
    def oracle(cls) -> "QuadratureConfig":
        """Independent settings used to cross-check the baseline evaluation."""
        return cls(
            target_abs_error=const.ORACLE_TARGET_ABS_ERROR,
            truncation_tail_bound=const.ORACLE_TAIL_BOUND,
            endpoint_rule="tanh-sinh",
            panel_order=const.ORACLE_PANEL_ORDER,
            form="eta",
            phase_per_panel=const.ORACLE_PHASE_PER_PANEL,
            max_panel_width=const.ORACLE_MAX_PANEL_WIDTH,
        )


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["linear", "geometric"] = "linear"
    start: float = Field(0.0, ge=0)
    stop: float = 20.0
    count: int = Field(201, ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> "GridSpec":
        if self.count > 1 and not self.stop > self.start:
            raise ValueError("grid stop must exceed start when count > 1")
        if self.kind == "geometric" and self.start <= 0:
            raise ValueError("geometric grid needs start > 0")
        return self

    def points(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.kind == "geometric":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


class MDDSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["toy", "breit-wigner", "tabulated"] = "toy"
    alpha: float = Field(0.0, ge=0)
    xi0: float = Field(1.0, gt=0)
    m0: float = 1.0
    gamma_bar: float = Field(0.2, gt=0)
    table: Optional[str] = None
    metadata: Optional[str] = None

    @model_validator(mode="after")
    def _check_table(self) -> "MDDSpec":
        if self.family == "tabulated" and not self.table:
            raise ValueError("tabulated family needs a table path")
        return self

    def build(self):
        from model.mdd import load_tabulated_mdd, make_breit_wigner, make_toy_mdd

        if self.family == "toy":
            return make_toy_mdd(self.alpha, self.xi0)
        if self.family == "breit-wigner":
            return make_breit_wigner(self.m0, self.gamma_bar, self.xi0)
        return load_tabulated_mdd(self.table, self.metadata)


class ScalingConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    window: Tuple[float, float] = const.SCALING_WINDOW
    fit_points: int = Field(const.FIT_POINTS, ge=const.MIN_FIT_POINTS)
    kappa_rel_tol: float = Field(const.KAPPA_REL_TOL, gt=0)
    slope_rel_tol: float = Field(const.SLOPE_REL_TOL, gt=0)
    asymptote_rel_tol: float = Field(const.ASYMPTOTE_REL_TOL, gt=0)
    # used instead of the relative test when the predicted coefficient is zero
    kappa_abs_floor: float = Field(1e-3, gt=0)

    @field_validator("window")
    @classmethod
    def _check_window(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not 0 < value[0] < value[1]:
            raise ValueError("window must satisfy 0 < tau_min < tau_max")
        return value


class VerifyConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = 20240917
    draws: int = Field(50, ge=1)
    long_time_window: Tuple[float, float] = const.LONG_TIME_WINDOW
    scaling: ScalingConfig = ScalingConfig()
    slope_rel_tol: float = Field(const.SLOPE_REL_TOL, gt=0)
    asymptote_rel_tol: float = Field(const.ASYMPTOTE_REL_TOL, gt=0)
    zeta_rel_tol: float = Field(const.ZETA_REL_TOL, gt=0)
    zeta_abs_floor: float = Field(const.ZETA_ABS_FLOOR, gt=0)
    mass_limit_rel_tol: float = Field(const.MASS_LIMIT_REL_TOL, gt=0)
    rate_rel_tol: float = Field(const.RATE_REL_TOL, gt=0)
    rate_spread_tol: float = Field(const.RATE_SPREAD_TOL, gt=0)
    derivative_rel_tol: float = Field(const.DERIVATIVE_REL_TOL, gt=0)
    oracle_agreement: float = Field(const.ORACLE_AGREEMENT, gt=0)
    normalization_tol: float = Field(const.NORMALIZATION_TOL, gt=0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mdd: MDDSpec = MDDSpec()
    rho: List[float] = [0.0]
    grid: GridSpec = GridSpec()
    quadrature: QuadratureConfig = QuadratureConfig()
    format: Literal["csv", "json"] = "csv"
    out: str = "results"
    mass_scale: Optional[float] = Field(None, gt=0)
    threads: int = Field(1, ge=1)
    options: Dict[str, Any] = {}

    @field_validator("rho")
    @classmethod
    def _check_rho(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one momentum is required")
        if any(r < 0 for r in value):
            raise ValueError("momenta must be non-negative")
        return value

    @classmethod
    def load(cls, path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Merge defaults, environment, an optional JSON file and explicit overrides
        (highest precedence). Nested sections are merged key by key.
        """
        env = env_defaults()
        data: Dict[str, Any] = {
            "threads": env["threads"],
            "out": env["out"],
            "quadrature": {"target_abs_error": env["tol"]},
        }
        if path:
            with open(path, "r") as f:
                _merge(data, json.load(f))
        if overrides:
            _merge(data, overrides)
        return cls.model_validate(data)

    def output_dir(self) -> Path:
        return Path(self.out)


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> None:
    """Merge extra into base; None values are skipped at every depth."""
    for key, value in extra.items():
        if value is None:
            continue
        if isinstance(value, dict):
            if not isinstance(base.get(key), dict):
                base[key] = {}
            _merge(base[key], value)
        else:
            base[key] = value
