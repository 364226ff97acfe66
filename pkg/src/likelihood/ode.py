"""
Coefficient ODE
Backward dynamics of the coefficients a_alpha(t) of A(t, y) when
u(t, y) = exp(-A(t, y)) solves

    du/dt + 1/2 tr(C d2u/dy2) - c(y) u = 0,      C = Sigma Sigma^T

between jump times. Substituting the ansatz gives

    dA/dt = -1/2 tr(C d2A) + 1/2 (grad A)^T C (grad A) - c

which is linear plus quadratic in the coefficient vector. Both parts are
assembled once per covariance matrix as dense operators:

    rhs(a) = L a + W(a, a) - b

Example usage:
    ode = CoefficientODE(get_index_set(1, 10), np.array([[1e-4]]))
    a_lo, substeps = ode.integrate(a_hi, b, t_lo=0.0, t_hi=0.5)
"""

import logging
import math
from typing import Tuple

import numpy as np

from src.errors import ParameterFaultError
from src.likelihood.multi_index import MultiIndexPoly, MultiIndexSet

BLOWUP_THRESHOLD = 1e12

logger = logging.getLogger("likelihood.ode")


class CoefficientODE:
    """Right-hand side and fixed-step integrators for the coefficient system."""

    def __init__(self, index_set: MultiIndexSet, covariance: np.ndarray):
        covariance = np.atleast_2d(np.asarray(covariance, dtype=float))
        if covariance.shape != (index_set.dim, index_set.dim):
            raise ValueError(
                f"Covariance shape {covariance.shape} does not match dimension {index_set.dim}"
            )
        self.index_set = index_set
        self.covariance = covariance
        self.linear = self._linear_operator()
        self.quadratic = self._quadratic_operator()
        n = index_set.size
        self._quadratic_flat = self.quadratic.reshape(n, n * n)

    def _linear_operator(self) -> np.ndarray:
        """L a = -1/2 sum_ij C_ij (d_i d_j A) coefficients."""
        iset = self.index_set
        mat = np.zeros((iset.size, iset.size))
        for i in range(iset.dim):
            for j in range(iset.dim):
                mat -= 0.5 * self.covariance[i, j] * (
                    iset.derivative_matrix(i) @ iset.derivative_matrix(j)
                )
        return mat

    def _quadratic_operator(self) -> np.ndarray:
        """W[alpha, beta, gamma] with W(a, a) = 1/2 sum_ij C_ij (d_i A)(d_j A)."""
        iset = self.index_set
        tensor = np.zeros((iset.size, iset.size, iset.size))
        for i in range(iset.dim):
            for j in range(iset.dim):
                if self.covariance[i, j] == 0.0:
                    continue
                tensor += 0.5 * self.covariance[i, j] * np.einsum(
                    "apq,pb,qc->abc",
                    iset.product_tensor,
                    iset.derivative_matrix(i),
                    iset.derivative_matrix(j),
                )
        return tensor

    def rhs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """da/dt for coefficient vector a and potential coefficients b."""
        return self.linear @ a + self._quadratic_flat @ np.outer(a, a).ravel() - b

    def rhs_poly(self, a: MultiIndexPoly, b: MultiIndexPoly) -> MultiIndexPoly:
        return MultiIndexPoly(self.index_set, self.rhs(a.coeffs, b.coeffs))

    @staticmethod
    def substeps_for(length: float, max_step: float, min_substeps: int) -> int:
        return max(int(min_substeps), int(math.ceil(length / max_step - 1e-12)))

    def integrate(
        self,
        a_end: np.ndarray,
        b: np.ndarray,
        t_lo: float,
        t_hi: float,
        max_step: float = 1e-3,
        min_substeps: int = 10,
        method: str = "euler",
    ) -> Tuple[np.ndarray, int]:
        """
        Integrate backward from t_hi to t_lo with fixed substeps.

        Args:
            a_end: Coefficients at t_hi
            b: Potential coefficients, constant on the interval
            t_lo: Interval start
            t_hi: Interval end
            max_step: Largest allowed substep
            min_substeps: Lower bound on the number of substeps
            method: "euler" (explicit) or "rk4"

        Returns:
            (coefficients at t_lo, number of substeps)
        """
        length = t_hi - t_lo
        if length < 0:
            raise ValueError(f"Interval end {t_hi} precedes start {t_lo}")
        a = np.array(a_end, dtype=float)
        if length == 0:
            return a, 0
        n = self.substeps_for(length, max_step, min_substeps)
        h = length / n
        with np.errstate(over="ignore", invalid="ignore"):
            if method == "euler":
                for _ in range(n):
                    a = a - h * self.rhs(a, b)
            elif method == "rk4":
                for _ in range(n):
                    k1 = self.rhs(a, b)
                    k2 = self.rhs(a - 0.5 * h * k1, b)
                    k3 = self.rhs(a - 0.5 * h * k2, b)
                    k4 = self.rhs(a - h * k3, b)
                    a = a - h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            else:
                raise ValueError(f"Unknown integration method: {method}")
        check_coefficients(a, t_lo)
        return a, n


def check_coefficients(a: np.ndarray, t: float) -> None:
    """Raise ParameterFaultError when the coefficients blew up."""
    if not np.all(np.isfinite(a)) or np.max(np.abs(a)) > BLOWUP_THRESHOLD:
        raise ParameterFaultError(f"Likelihood coefficients blew up at t={t:.6g}")


def shift_coeffs(a: MultiIndexPoly, axis: int, delta: float) -> MultiIndexPoly:
    """Re-center along `axis`: returns the coefficients of y -> a(y + delta)."""
    return a.shift(axis, delta)


def jump_update(a: MultiIndexPoly, jump_coeffs) -> MultiIndexPoly:
    """
    Multiply u by the jump intensity: a <- a - b^z.

    Args:
        a: Coefficients in the pre-jump centering
        jump_coeffs: Log-intensity coefficients of the event type, or None for a
            state-only jump

    Returns:
        Updated coefficients
    """
    if jump_coeffs is None:
        return a.copy()
    coeffs = getattr(jump_coeffs, "coeffs", jump_coeffs)
    return MultiIndexPoly(a.index_set, a.coeffs - np.asarray(coeffs, dtype=float))


def ode_rhs(a: MultiIndexPoly, b: MultiIndexPoly, covariance: np.ndarray) -> MultiIndexPoly:
    """Functional form of CoefficientODE.rhs for one-off evaluations."""
    return CoefficientODE(a.index_set, covariance).rhs_poly(a, b)


def integrate_interval(
    a_end: MultiIndexPoly,
    b: MultiIndexPoly,
    covariance: np.ndarray,
    t_lo: float,
    t_hi: float,
    h: float,
    method: str = "euler",
) -> MultiIndexPoly:
    """Backward integration over [t_lo, t_hi] with substep at most h."""
    ode = CoefficientODE(a_end.index_set, covariance)
    a, _ = ode.integrate(a_end.coeffs, b.coeffs, t_lo, t_hi, max_step=h, min_substeps=1, method=method)
    return MultiIndexPoly(a_end.index_set, a)
