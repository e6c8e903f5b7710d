"""
Figure datasets: each catalogued figure is a set of curves (label, alpha, rho) for the
toy density with xi0 = 1, written as one CSV (or JSON) file per curve label.
"""
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from evaluators.observables import decay_curve
from evaluators.scaling import (
    mass_ratio_curve, momentum_ratio_curve, rate_ratio_curve, scaling_ratio_curve, survivals,
)
from model.kinematics import Kinematics
from model.mdd import make_toy_mdd
from utils import const
from utils.config import QuadratureConfig
from utils.errors import DecayLabError, DomainError
from utils.output import write_csv, write_json

logger = logging.getLogger(__name__)

UNDEFINED = "undefined"


class GetDatasets:

    def __init__(self, out: str = "results", cfg: Optional[QuadratureConfig] = None,
                 threads: int = 1, fmt: str = "csv", mass_scale: Optional[float] = None,
                 progress: bool = False):
        self.out = Path(out)
        self.cfg = cfg
        self.threads = threads
        self.fmt = fmt
        self.mass_scale = mass_scale
        self.progress = progress

    @staticmethod
    def figure_spec(n: int) -> Dict:
        if n not in const.FIGURES:
            raise DomainError(f"figure must be in 1..{len(const.FIGURES)}, got {n}")
        return const.FIGURES[n]

    @staticmethod
    def figure_times(n: int) -> Tuple[np.ndarray, np.ndarray]:
        """(abscissa, tau): the abscissa is log tau for log-time figures."""
        spec = GetDatasets.figure_spec(n)
        lo, hi = spec["tau"]
        if spec["log_time"]:
            x = np.linspace(lo, hi, const.LOG_FIGURE_POINTS)
            return x, np.exp(x)
        x = np.linspace(lo, hi, const.LINEAR_FIGURE_POINTS)
        return x, x

    def curve_values(self, quantity: str, alpha: float, rho: float, tau: np.ndarray) -> Tuple[np.ndarray, List[str]]:
        """Plotted value and per-point flag of one curve."""
        mdd = make_toy_mdd(float(alpha), const.FIGURE_XI0)
        kin = Kinematics.for_mdd(mdd, rho)
        scale = self.mass_scale or 1.0
        flags = None

        if quantity == "survival":
            values = survivals(mdd, rho, tau, self.cfg, self.threads)
        elif quantity == "abs_log_survival":
            values = np.abs(np.log(survivals(mdd, rho, tau, self.cfg, self.threads)))
        elif quantity in ("mass", "rate", "abs_log_mass_deviation", "abs_log_rate"):
            curve = decay_curve(mdd, kin, tau, self.cfg, self.threads)
            flags = list(curve.flags)
            if quantity == "mass":
                values = curve.mass * scale
            elif quantity == "rate":
                values = curve.rate * scale
            elif quantity == "abs_log_rate":
                values = np.abs(np.log(curve.rate * scale))
            else:
                values = np.abs(np.log(np.abs(curve.mass / kin.eta0 - 1.0)))
        elif quantity in ("momentum_ratio", "scaling_ratio", "mass_ratio", "rate_ratio"):
            builder = {
                "momentum_ratio": momentum_ratio_curve,
                "scaling_ratio": scaling_ratio_curve,
                "mass_ratio": mass_ratio_curve,
                "rate_ratio": rate_ratio_curve,
            }[quantity]
            values = np.asarray([v for _, v in builder(mdd, rho, tau, self.cfg, self.threads)])
        else:
            raise DomainError(f"unknown figure quantity {quantity!r}")

        if flags is None:
            flags = [""] * len(values)
        flags = [f or ("" if math.isfinite(v) else UNDEFINED) for f, v in zip(flags, values)]
        return np.asarray(values, dtype=float), flags

    def build_figure(self, n: int) -> List[Dict]:
        """Write every curve of figure n; one success record per curve label."""
        spec = self.figure_spec(n)
        x, tau = self.figure_times(n)
        scale = self.mass_scale or 1.0
        if spec["log_time"]:
            header = ("log_tau", "value", "flag")
            abscissa = x - math.log(scale)
        else:
            header = ("tau", "value", "flag")
            abscissa = x / scale

        records = []
        for label, alpha, rho in tqdm(spec["curves"], disable=not self.progress, desc=f"figure {n}"):
            record = {"figure": n, "label": label, "alpha": alpha, "rho": rho,
                      "quantity": spec["quantity"]}
            try:
                values, flags = self.curve_values(spec["quantity"], alpha, rho, tau)
                rows = list(zip(abscissa, values, flags))
                path = self.out / f"figure_{n:02d}_{label}.{self.fmt}"
                if self.fmt == "csv":
                    write_csv(path, header, rows)
                else:
                    write_json(path, {
                        **record,
                        "rows": [dict(zip(header, (float(a), float(v), f))) for a, v, f in rows],
                    })
                record.update({"success": True, "file": str(path), "rows": len(rows),
                               "flagged": sum(1 for f in flags if f)})
            except DecayLabError as e:
                logger.error("figure %d curve %s failed: %s", n, label, e)
                record.update({"success": False, "error": str(e), "error_type": type(e).__name__})
            records.append(record)
        return records


if __name__ == "__main__":
    import json

    datasets = GetDatasets(out="results", progress=True)
    all_records = {}
    for n in (1, 4, 6):
        all_records[n] = datasets.build_figure(n)

    with open("figure_datasets.json", "w") as f:
        json.dump(all_records, f, indent=4)
