from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr


@dataclass(frozen=True)
class ModelTag:
    N: int
    R0: object
    alpha: object = 0


@dataclass(frozen=True)
class Distribution:
    """Probability vector on the states ``1..N``.

    ``probs[k]`` is the mass at state ``k + 1``. ``tail_mass`` is the mass a
    truncated distribution (the geometric ones) places beyond ``N``; it is
    zero for everything that is normalised on ``1..N``.
    """

    probs: tuple
    model_tag: ModelTag
    label: str = "qsd"
    tail_mass: object = field(default_factory=lambda: mpfr(0))

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(self.probs))
        if len(self.probs) != self.model_tag.N:
            raise ValueError(f"{self.label}: {len(self.probs)} entries for N={self.model_tag.N}")
        if any(p < 0 for p in self.probs):
            raise ValueError(f"{self.label}: negative probability mass")

    @property
    def N(self):
        return self.model_tag.N

    def __len__(self):
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, k):
        return self.probs[k]

    def mass(self, n):
        """Probability of state ``n`` (1-based)."""
        if not 1 <= n <= self.N:
            raise IndexError(f"state {n} outside 1..{self.N}")
        return self.probs[n - 1]

    @property
    def precision(self):
        return max((p.precision for p in self.probs), default=53)

    def _native(self):
        # reductions run at the precision the entries were computed in
        return gmpy2.context(precision=self.precision)

    def total(self):
        with self._native():
            return gmpy2.fsum(self.probs)

    def normalization_error(self):
        """``|sum - 1|`` net of the declared truncated tail."""
        with self._native():
            return max(abs(gmpy2.fsum(self.probs) - 1) - self.tail_mass, mpfr(0))

    def is_normalized(self, tol):
        return self.normalization_error() <= tol

    def mean(self):
        with self._native():
            return gmpy2.fsum(p * (k + 1) for k, p in enumerate(self.probs))

    def to_floats(self):
        return [float(p) for p in self.probs]
