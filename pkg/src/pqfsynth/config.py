"""Tunable knobs shared across the pipeline stages."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SynthConfig:
    precision_bits: int | None = None   # None: derive from eps
    pslq_iter_factor: int = 64          # iteration cap = factor * log2(1/eps)
    candidate_budget_factor: int = 64   # modifier budget = factor * L1
    fallback_budget_factor: int = 8     # fallback budget = factor * L
    rho_iter_budget: int = 300_000      # Pollard-rho iterations per cofactor
    mr_rounds: int = 64                 # Miller-Rabin rounds
    seed: int = 0

    def working_precision(self, eps) -> int:
        if self.precision_bits is not None:
            return max(64, self.precision_bits)
        return 4 * math.ceil(math.log2(1.0 / float(eps))) + 64


DEFAULT_CONFIG = SynthConfig()
