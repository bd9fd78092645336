"""Strictly increasing transforms applied to the L1 loss."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ModelError, SpecParseError

__all__ = ["LossTransform", "parse_gamma"]


@dataclass(frozen=True)
class LossTransform:
    """Map ``gamma`` on [0, 2] with its derivative.

    ``power(k)`` means ``gamma(L) = L**k``. Custom transforms must be supplied
    together with their derivative.
    """

    kind: str
    k: float = 1.0
    func: Callable | None = field(default=None, repr=False)
    deriv: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "power" and not self.k > 0:
            raise ModelError(f"power transform needs k > 0, got {self.k!r}")
        if self.kind == "custom":
            if self.func is None or self.deriv is None:
                raise ModelError("custom transform needs both the map and its derivative")
            grid = np.linspace(0.0, 2.0, 201)
            vals = np.asarray(self.func(grid), dtype=float)
            if not np.all(np.isfinite(vals)) or np.any(np.diff(vals) <= 0):
                raise ModelError("custom transform must be finite and strictly increasing on [0, 2]")
        elif self.kind not in ("identity", "power"):
            raise ModelError(f"unknown loss transform {self.kind!r}")

    @classmethod
    def identity(cls) -> "LossTransform":
        return cls("identity")

    @classmethod
    def power(cls, k: float) -> "LossTransform":
        if float(k) == 1.0:
            return cls("identity")
        return cls("power", k=float(k))

    @classmethod
    def custom(cls, func: Callable, deriv: Callable) -> "LossTransform":
        return cls("custom", func=func, deriv=deriv)

    def apply(self, loss):
        loss = np.asarray(loss, dtype=float)
        if self.kind == "identity":
            return loss
        if self.kind == "power":
            return np.maximum(loss, 0.0) ** self.k
        return np.asarray(self.func(loss), dtype=float)

    __call__ = apply

    def derivative(self, loss):
        loss = np.asarray(loss, dtype=float)
        if self.kind == "identity":
            return np.ones_like(loss)
        if self.kind == "power":
            with np.errstate(divide="ignore"):
                return self.k * np.maximum(loss, 0.0) ** (self.k - 1.0)
        return np.asarray(self.deriv(loss), dtype=float)

    def describe(self) -> str:
        if self.kind == "power":
            return f"power:{self.k:g}"
        return self.kind


def parse_gamma(text: str) -> LossTransform:
    """Parse ``identity`` or ``power:k``."""
    text = text.strip()
    if text == "identity":
        return LossTransform.identity()
    m = re.fullmatch(r"power:\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)", text)
    if m:
        try:
            return LossTransform.power(float(m.group(1)))
        except ModelError as exc:
            raise SpecParseError(str(exc), text) from exc
    raise SpecParseError(f"unknown loss transform {text!r}; use identity or power:k", text)
