import math
from dataclasses import dataclass

import numpy as np

from utils.errors import DomainError


@dataclass(frozen=True)
class Kinematics:
    """
    Dimensionless momentum rho = p / m_s and mass lower bound xi0 = mu0 / m_s,
    with the energy map eta(xi) = sqrt(rho^2 + xi^2).
    """

    rho: float
    xi0: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho >= 0):
            raise DomainError(f"rho must be >= 0, got {self.rho}")
        if not (math.isfinite(self.xi0) and self.xi0 > 0):
            raise DomainError(f"xi0 must be > 0, got {self.xi0}")

    @classmethod
    def for_mdd(cls, mdd, rho: float) -> "Kinematics":
        return cls(float(rho), mdd.xi0)

    @property
    def eta0(self) -> float:
        return float(np.hypot(self.rho, self.xi0))

    def energy(self, xi):
        return np.hypot(self.rho, xi)

    def mass(self, eta):
        """Inverse energy map xi(eta) = sqrt(eta^2 - rho^2)."""
        eta = np.asarray(eta, dtype=float)
        return np.sqrt((eta - self.rho) * (eta + self.rho))

    def lorentz_factor(self, xi):
        return self.energy(xi) / xi

    def velocity(self, xi):
        return self.rho / self.energy(xi)

    def rest_frame(self) -> "Kinematics":
        return Kinematics(0.0, self.xi0)
