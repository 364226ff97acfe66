"""
Multi-Index Polynomials
Dense coefficient arrays over {alpha in N^d : |alpha| <= n_deg}.

Multi-indices are laid out in graded-lexicographic order: by total degree, then
lexicographically descending within a degree, e.g. for d=2:

    (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) ...

Index sets are cached per (d, n_deg) together with the tables used by the
likelihood kernels (derivatives, truncated products, re-centering).

Example usage:
    p = MultiIndexPoly.from_coeffs(1, 2, [1.0, 2.0, 3.0])   # 1 + 2y + 3y^2
    p.evaluate(np.array([[0.5]]))                          # [2.75]
    p.shift(0, 1.0).coeffs                                 # p(y + 1) = 6 + 8y + 3y^2
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial
from typing import Dict, List, Sequence, Tuple

import numpy as np


def _indices_of_degree(d: int, k: int) -> List[Tuple[int, ...]]:
    if d == 1:
        return [(k,)]
    out = []
    for first in range(k, -1, -1):
        for rest in _indices_of_degree(d - 1, k - first):
            out.append((first,) + rest)
    return out


class MultiIndexSet:
    """Ordered multi-index set with precomputed arithmetic tables."""

    def __init__(self, dim: int, n_deg: int):
        if dim < 1:
            raise ValueError(f"Dimension must be >= 1, got {dim}")
        if n_deg < 0:
            raise ValueError(f"Degree must be >= 0, got {n_deg}")
        self.dim = dim
        self.n_deg = n_deg
        self.alphas: List[Tuple[int, ...]] = []
        for k in range(n_deg + 1):
            self.alphas.extend(_indices_of_degree(dim, k))
        self.index: Dict[Tuple[int, ...], int] = {a: i for i, a in enumerate(self.alphas)}
        self.size = len(self.alphas)
        self.exponents = np.array(self.alphas, dtype=np.int64).reshape(self.size, dim)
        self.degrees = self.exponents.sum(axis=1)
        self.factorials = np.array(
            [float(np.prod([factorial(k) for k in a])) for a in self.alphas]
        )
        self._derivatives = [self._derivative_matrix(i) for i in range(dim)]
        self._product = self._product_tensor()
        self._shift_tables = [self._shift_table(i) for i in range(dim)]

    def __repr__(self) -> str:
        return f"MultiIndexSet(dim={self.dim}, n_deg={self.n_deg}, size={self.size})"

    def unit(self, axis: int) -> int:
        """Index of the monomial y_axis."""
        e = [0] * self.dim
        e[axis] = 1
        return self.index[tuple(e)]

    def shifted(self, alpha: Sequence[int], axis: int, amount: int = 1) -> int:
        """Index of alpha + amount*e_axis, or -1 when outside the set."""
        moved = list(alpha)
        moved[axis] += amount
        return self.index.get(tuple(moved), -1)

    def _derivative_matrix(self, axis: int) -> np.ndarray:
        """D with (D a)_beta = (beta_axis + 1) a_{beta + e_axis}."""
        mat = np.zeros((self.size, self.size))
        for row, beta in enumerate(self.alphas):
            col = self.shifted(beta, axis)
            if col >= 0:
                mat[row, col] = beta[axis] + 1
        return mat

    def _product_tensor(self) -> np.ndarray:
        """T[alpha, beta, gamma] = 1 when beta + gamma = alpha (truncated)."""
        tensor = np.zeros((self.size, self.size, self.size))
        for bi, beta in enumerate(self.alphas):
            for gi, gamma in enumerate(self.alphas):
                total = tuple(b + g for b, g in zip(beta, gamma))
                ai = self.index.get(total)
                if ai is not None:
                    tensor[ai, bi, gi] = 1.0
        return tensor

    def _shift_table(self, axis: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        src, dst, power, weight = [], [], [], []
        for di, alpha in enumerate(self.alphas):
            for n in range(self.n_deg - sum(alpha) + 1):
                si = self.shifted(alpha, axis, n)
                if si < 0:
                    continue
                src.append(si)
                dst.append(di)
                power.append(n)
                weight.append(comb(alpha[axis] + n, alpha[axis]))
        return (
            np.array(src, dtype=np.int64),
            np.array(dst, dtype=np.int64),
            np.array(power, dtype=np.int64),
            np.array(weight, dtype=float),
        )

    def derivative_matrix(self, axis: int) -> np.ndarray:
        return self._derivatives[axis]

    @property
    def product_tensor(self) -> np.ndarray:
        return self._product

    def monomials(self, y: np.ndarray) -> np.ndarray:
        """Matrix of y^alpha for points y of shape (m, d); returns (m, size)."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.dim:
            raise ValueError(f"Expected points of dimension {self.dim}, got {y.shape[1]}")
        return np.prod(y[:, None, :] ** self.exponents[None, :, :], axis=2)

    def shift(self, coeffs: np.ndarray, axis: int, delta: float) -> np.ndarray:
        """Coefficients of y -> p(y + delta e_axis)."""
        if delta == 0.0:
            return np.array(coeffs, dtype=float)
        src, dst, power, weight = self._shift_tables[axis]
        contrib = coeffs[src] * weight * float(delta) ** power
        return np.bincount(dst, weights=contrib, minlength=self.size)

    def multiply(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Truncated product of two coefficient vectors."""
        return np.einsum("abc,b,c->a", self._product, left, right)


@lru_cache(maxsize=None)
def get_index_set(dim: int, n_deg: int) -> MultiIndexSet:
    """Shared, cached index set for (dim, n_deg)."""
    return MultiIndexSet(dim, n_deg)


@dataclass
class MultiIndexPoly:
    """Polynomial sum_alpha coeffs[alpha] y^alpha truncated at total degree n_deg."""

    index_set: MultiIndexSet
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.index_set.size,):
            raise ValueError(
                f"Expected {self.index_set.size} coefficients, got shape {self.coeffs.shape}"
            )

    @classmethod
    def zeros(cls, dim: int, n_deg: int) -> "MultiIndexPoly":
        index_set = get_index_set(dim, n_deg)
        return cls(index_set, np.zeros(index_set.size))

    @classmethod
    def constant(cls, dim: int, n_deg: int, value: float) -> "MultiIndexPoly":
        poly = cls.zeros(dim, n_deg)
        poly.coeffs[0] = value
        return poly

    @classmethod
    def from_coeffs(cls, dim: int, n_deg: int, coeffs: Sequence[float]) -> "MultiIndexPoly":
        return cls(get_index_set(dim, n_deg), np.asarray(coeffs, dtype=float))

    @classmethod
    def from_terms(cls, dim: int, n_deg: int, terms: Dict[Tuple[int, ...], float]) -> "MultiIndexPoly":
        poly = cls.zeros(dim, n_deg)
        for alpha, value in terms.items():
            if sum(alpha) <= n_deg:
                poly.coeffs[poly.index_set.index[tuple(alpha)]] += value
        return poly

    @property
    def dim(self) -> int:
        return self.index_set.dim

    @property
    def n_deg(self) -> int:
        return self.index_set.n_deg

    def __getitem__(self, alpha: Tuple[int, ...]) -> float:
        idx = self.index_set.index.get(tuple(alpha))
        return 0.0 if idx is None else float(self.coeffs[idx])

    def __add__(self, other: "MultiIndexPoly") -> "MultiIndexPoly":
        return MultiIndexPoly(self.index_set, self.coeffs + other.coeffs)

    def __sub__(self, other: "MultiIndexPoly") -> "MultiIndexPoly":
        return MultiIndexPoly(self.index_set, self.coeffs - other.coeffs)

    def scale(self, factor: float) -> "MultiIndexPoly":
        return MultiIndexPoly(self.index_set, self.coeffs * factor)

    def copy(self) -> "MultiIndexPoly":
        return MultiIndexPoly(self.index_set, self.coeffs.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """Values at points y of shape (m, d)."""
        return self.index_set.monomials(y) @ self.coeffs

    def shift(self, axis: int, delta: float) -> "MultiIndexPoly":
        """Re-centered polynomial y -> p(y + delta e_axis)."""
        return MultiIndexPoly(self.index_set, self.index_set.shift(self.coeffs, axis, delta))

    def derivative(self, axis: int) -> "MultiIndexPoly":
        return MultiIndexPoly(self.index_set, self.index_set.derivative_matrix(axis) @ self.coeffs)

    def multiply(self, other: "MultiIndexPoly") -> "MultiIndexPoly":
        return MultiIndexPoly(self.index_set, self.index_set.multiply(self.coeffs, other.coeffs))

    def exp(self) -> "MultiIndexPoly":
        """Truncated Taylor coefficients of exp(p)."""
        head = float(self.coeffs[0])
        tail = self.coeffs.copy()
        tail[0] = 0.0
        # tail has no constant term, so tail^m only reaches degree >= m
        result = np.zeros_like(tail)
        result[0] = 1.0
        term = result.copy()
        for m in range(1, self.n_deg + 1):
            term = self.index_set.multiply(term, tail) / m
            result = result + term
        return MultiIndexPoly(self.index_set, np.exp(head) * result)
