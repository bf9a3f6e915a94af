"""Selection outcome shared by every policy family."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import NoSelectionError, ValidationError

PARTITION_TOL = 1e-12


@dataclass(frozen=True)
class SelectionOutcome:
    """Closed-form (or estimated) result of one selection round.

    ``p_e0``/``p_e1`` are Pr{E_a, Ỹ=1}: a qualified member of group a fills
    the position. ``p_select0``/``p_select1`` are Pr{E_a} irrespective of
    qualification. ``expected_steps`` is None when nobody is ever accepted.
    """

    p_e0: float
    p_e1: float
    accuracy: float
    p_accept_per_step: float
    p_select0: float = math.nan
    p_select1: float = math.nan

    def __post_init__(self):
        for name in ("p_e0", "p_e1", "accuracy", "p_accept_per_step"):
            v = getattr(self, name)
            if not (-PARTITION_TOL <= v <= 1 + PARTITION_TOL):
                raise ValidationError(f"{name}={v!r} outside [0,1]")
        if abs(self.p_e0 + self.p_e1 - self.accuracy) > PARTITION_TOL:
            raise ValidationError("p_e0 + p_e1 must equal accuracy")

    @classmethod
    def from_joint(cls, z_a_y1, z_a, label: str = "policy") -> SelectionOutcome:
        """Build from Pr{Z=1, A=a, Y=1} and Pr{Z=1, A=a} for a in {0, 1}.

        Every arrival is independent, so the selected applicant is distributed
        as one arrival conditioned on Z=1 (a geometric series over steps).
        """
        p_accept = float(z_a[0] + z_a[1])
        if p_accept <= 0:
            raise NoSelectionError(f"{label} accepts nobody: the process never halts")
        pe0 = float(z_a_y1[0]) / p_accept
        pe1 = float(z_a_y1[1]) / p_accept
        return cls(
            p_e0=pe0,
            p_e1=pe1,
            accuracy=pe0 + pe1,
            p_accept_per_step=p_accept,
            p_select0=float(z_a[0]) / p_accept,
            p_select1=float(z_a[1]) / p_accept,
        )

    @classmethod
    def never(cls) -> SelectionOutcome:
        """Outcome of a policy that rejects everyone (no position is filled)."""
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    @property
    def disparity(self) -> float:
        return abs(self.p_e0 - self.p_e1)

    @property
    def expected_steps(self) -> float | None:
        return 1.0 / self.p_accept_per_step if self.p_accept_per_step > 0 else None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["disparity"] = self.disparity
        d["expected_steps"] = self.expected_steps
        return d
