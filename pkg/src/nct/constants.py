"""Physical constants (CODATA 2018) and the unit-system hook.

Every physics routine takes its constants from a `Constants` instance (or
from the parameter objects that carry them), never from module globals, so
the whole rate pipeline can be evaluated in a rescaled unit system for
dimensional auditing.
"""

from __future__ import annotations

from dataclasses import dataclass

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23      # J/K

M_RB87 = 1.443e-25      # kg, used as the default gas atom mass


@dataclass(frozen=True)
class Constants:
    hbar: float = HBAR
    k_b: float = K_B

    def __post_init__(self) -> None:
        if self.hbar <= 0 or self.k_b <= 0:
            raise ValueError("constants must be positive")


CODATA = Constants()
