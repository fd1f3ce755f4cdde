"""
Shared behaviour of every population model.

A model subclass writes its right-hand side once, in `rhs(s, p)`, using plain
arithmetic so that the same expression evaluates on floats and on sympy
symbols. `params(exact=True)` feeds exact rationals through the same code,
which is what the normal-form pipeline polynomialises.
"""

from abc import abstractmethod
from types import SimpleNamespace
from typing import ClassVar, List, Sequence, Tuple

import numpy as np
import sympy as sp

from utils.exceptions import DimensionMismatchError


def _convert(value, exact: bool):
    if isinstance(value, (list, tuple)):
        return [_convert(v, exact) for v in value]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return value
    return sp.Rational(str(value)) if exact else float(value)


class PopulationModel:
    """
    Mixin for pydantic model records.

    Subclasses provide `family`, `dimension`, `coordinate_names`, `rhs` and
    `jacobian`; they may override `derive` (computed parameters) and
    `time_factor` (positive factor that turns the field into a polynomial).
    """

    dimension: ClassVar[int] = 3
    coordinate_names: ClassVar[Tuple[str, ...]] = ("x", "y", "z")

    def params(self, exact: bool = False) -> SimpleNamespace:
        values = {
            name: _convert(getattr(self, name), exact)
            for name in type(self).model_fields
            if name != "family"
        }
        return self.derive(SimpleNamespace(**values))

    def derive(self, p: SimpleNamespace) -> SimpleNamespace:
        return p

    @abstractmethod
    def rhs(self, s: Sequence, p: SimpleNamespace) -> List:
        """Componentwise right-hand side."""

    @abstractmethod
    def jacobian(self, s: Sequence[float]) -> np.ndarray:
        """Analytic Jacobian at s."""

    def time_factor(self, s: Sequence, p: SimpleNamespace):
        return 1

    def check_state(self, s: Sequence[float]) -> np.ndarray:
        state = np.asarray(s, dtype=float)
        if state.shape != (self.dimension,):
            raise DimensionMismatchError(self.dimension, state.size)
        return state

    def vector_field(self, s: Sequence[float]) -> np.ndarray:
        state = self.check_state(s)
        return np.array(self.rhs(state, self.params()), dtype=float)

    def __call__(self, t: float, s: Sequence[float]) -> np.ndarray:
        return self.vector_field(s)

    def residual(self, s: Sequence[float]) -> float:
        return float(np.linalg.norm(self.vector_field(s)))

    def polynomial_factor(self, s: Sequence[float]) -> float:
        return float(self.time_factor(self.check_state(s), self.params()))

    def symbolic_field(self, symbols: Sequence[sp.Symbol] = None):
        """
        Exact polynomial form of the field (rhs times the time factor).

        Returns:
            (symbols, list of expanded sympy polynomials)
        """
        syms = tuple(symbols) if symbols is not None else sp.symbols(self.coordinate_names, real=True)
        p = self.params(exact=True)
        factor = self.time_factor(syms, p)
        field = [sp.expand(sp.cancel(component * factor)) for component in self.rhs(syms, p)]
        return syms, field

    def summary(self) -> dict:
        data = self.model_dump()
        derived = vars(self.params())
        data["derived"] = {
            k: v for k, v in derived.items()
            if k not in data and isinstance(v, float)
        }
        return data


def finite_difference_jacobian(model: PopulationModel, s: Sequence[float], h: float = 1e-6) -> np.ndarray:
    """Central differences with a relative step."""
    state = model.check_state(s)
    n = state.size
    jac = np.empty((n, n))
    for j in range(n):
        step = h * max(1.0, abs(state[j]))
        forward = state.copy()
        backward = state.copy()
        forward[j] += step
        backward[j] -= step
        jac[:, j] = (model.vector_field(forward) - model.vector_field(backward)) / (2 * step)
    return jac
