from __future__ import annotations

import logging
import math
import threading
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy.integrate import quad

from config import settings
from services.symbolic.expression import Expression, compile_expression
from services.symbolic.polynomial import Polynomial
from services.symbolic.rational import to_polynomial

logger = logging.getLogger(__name__)

Integrand = Union[Expression, Callable[[float], float]]


class QuadratureError(RuntimeError):
    def __init__(self, message: str, *, a: float, b: float):
        self.a = a
        self.b = b
        super().__init__(f"{message} on [{a!r}, {b!r}]")


class Antiderivative:
    """
    Primitive x -> integral_0^x f(s) ds.

    Exact (polynomial) when f is a polynomial expression; otherwise adaptive
    quadrature over fixed-width panels whose prefix sums are cached. Reads of the
    cache are lock-free; inserts are serialized.
    """

    def __init__(
        self,
        integrand: Integrand,
        *,
        tol: Optional[float] = None,
        panel_width: Optional[float] = None,
        label: str = "",
    ):
        self.tol = float(tol if tol is not None else settings.quad_outer_tol)
        self.panel_width = float(panel_width if panel_width is not None else settings.quad_panel_width)
        self.polynomial: Optional[Polynomial] = None
        self.label = label

        if isinstance(integrand, Expression):
            self.label = label or str(integrand)
            poly = to_polynomial(integrand)
            if poly is not None:
                self.polynomial = poly.antiderivative()
            self._f = compile_expression(integrand).scalar
        else:
            self._f = integrand

        # prefix[k] = integral_0^{k * panel_width} f
        self._prefix: Dict[int, float] = {0: 0.0}
        self._lock = threading.Lock()

    @property
    def exact(self) -> bool:
        return self.polynomial is not None

    def _quad(self, a: float, b: float) -> float:
        if a == b:
            return 0.0
        # per-panel tolerance leaves headroom for summing many panels
        eps = self.tol * 1e-2
        res = quad(self._f, a, b, epsabs=eps, epsrel=eps, limit=200, full_output=1)
        value, err = res[0], res[1]
        if len(res) > 3 or not math.isfinite(value):
            msg = res[3] if len(res) > 3 else "non-finite value"
            if not math.isfinite(value) or err > self.tol:
                raise QuadratureError(f"quadrature of {self.label or 'integrand'} did not converge ({msg})", a=a, b=b)
            logger.debug("quad warning on [%g, %g] for %s: %s", a, b, self.label, msg)
        return float(value)

    def _prefix_at(self, k: int) -> float:
        cached = self._prefix.get(k)
        if cached is not None:
            return cached
        step = 1 if k > 0 else -1
        # find the nearest cached index between 0 and k
        j = k
        while j not in self._prefix:
            j -= step
        acc = self._prefix[j]
        h = self.panel_width
        new_values: Dict[int, float] = {}
        while j != k:
            nxt = j + step
            acc += self._quad(j * h, nxt * h)
            new_values[nxt] = acc
            j = nxt
        with self._lock:
            for idx, val in new_values.items():
                self._prefix.setdefault(idx, val)
            return self._prefix[k]

    def __call__(self, x: float) -> float:
        if self.polynomial is not None:
            return float(self.polynomial.evaluate_float(float(x)))
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"antiderivative at non-finite x={x!r}")
        h = self.panel_width
        k = int(math.floor(x / h)) if x >= 0 else int(math.ceil(x / h))
        return self._prefix_at(k) + self._quad(k * h, x)

    def evaluate_array(self, xs) -> np.ndarray:
        arr = np.asarray(xs, dtype=float)
        if self.polynomial is not None:
            return np.asarray(self.polynomial.evaluate_float(arr), dtype=float)
        return np.array([self(v) for v in arr.ravel()], dtype=float).reshape(arr.shape)


def antiderivative(e: Integrand, **kwargs) -> Antiderivative:
    return Antiderivative(e, **kwargs)
