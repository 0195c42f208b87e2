"""Decision-level fusion of two recognition modes."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArgumentError

__all__ = ["ModeDecision", "FusionConfig", "fuse", "derive_weights"]


@dataclass(frozen=True)
class ModeDecision:
    """A mode's winning label and its likelihood in [0, 1]."""

    label: object
    likelihood: float

    def __post_init__(self) -> None:
        a = float(self.likelihood)
        if not 0.0 <= a <= 1.0:
            raise ArgumentError(f"likelihood must lie in [0, 1], got {self.likelihood!r}")
        object.__setattr__(self, "likelihood", a)


@dataclass(frozen=True)
class FusionConfig:
    theta1: float = 0.8
    theta2: float = 0.85
    w1: float = 0.5
    w2: float = 0.5

    def __post_init__(self) -> None:
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ArgumentError(f"{name} must lie in [0, 1], got {v!r}")
        for name in ("w1", "w2"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"{name} must be positive")


def fuse(d1: ModeDecision, d2: ModeDecision, cfg: FusionConfig = FusionConfig()) -> tuple[object, int]:
    """Apply the four-row rule table; returns ``(label, branch)``.

    1. both confident: the larger likelihood wins (mode 1 on ties);
    2. only mode 1 confident: mode 1;
    3. only mode 2 confident: mode 2;
    4. neither: the larger weighted likelihood wins (mode 1 on ties).

    "Confident" means the likelihood reaches the mode's threshold.
    """
    a1, a2 = d1.likelihood, d2.likelihood
    up1, up2 = a1 >= cfg.theta1, a2 >= cfg.theta2
    if up1 and up2:
        return (d1.label if a2 <= a1 else d2.label), 1
    if up1:
        return d1.label, 2
    if up2:
        return d2.label, 3
    return (d1.label if cfg.w2 * a2 <= cfg.w1 * a1 else d2.label), 4


def derive_weights(acc1: float, acc2: float) -> tuple[float, float]:
    """Weights proportional to each mode's standalone accuracy, summing to 1."""
    for name, a in (("acc1", acc1), ("acc2", acc2)):
        if not 0.0 < a <= 1.0:
            raise ArgumentError(f"{name} must lie in (0, 1], got {a!r}")
    total = acc1 + acc2
    return acc1 / total, acc2 / total
