"""Truncated bivariate Taylor jets up to total degree 3.

A jet carries the value of a function of two variables together with all
partial derivatives up to third order at an expansion point.  Coefficients
are stored Taylor-normalized (divided by i!*j!) so that multiplication is a
plain truncated Cauchy product; ``extract`` multiplies the factorials back.

Slot ordering is fixed: (0,0),(1,0),(0,1),(2,0),(1,1),(0,2),(3,0),(2,1),
(1,2),(0,3).  The orderings for lower truncation degrees are prefixes of
this one, which lets batched network code work on (..., C) arrays with
C in {1, 3, 6, 10} for degrees 0..3.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _iproduct

import numpy as np

MULTI_INDICES: tuple[tuple[int, int], ...] = (
    (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3),
)
SLOT: dict[tuple[int, int], int] = {mi: k for k, mi in enumerate(MULTI_INDICES)}
N_COEFFS: dict[int, int] = {0: 1, 1: 3, 2: 6, 3: 10}
MAX_DEGREE = 3

# i! * j! per slot, used by extract().
FACTORIALS = np.array([1.0, 1, 1, 2, 1, 2, 6, 2, 2, 6])


def _build_product_triples(deg: int) -> tuple[tuple[int, int, int], ...]:
    c = N_COEFFS[deg]
    triples = []
    for ka, kb in _iproduct(range(c), range(c)):
        ia, ja = MULTI_INDICES[ka]
        ib, jb = MULTI_INDICES[kb]
        if ia + ja + ib + jb <= deg:
            triples.append((ka, kb, SLOT[(ia + ib, ja + jb)]))
    return tuple(triples)


PRODUCT_TRIPLES: dict[int, tuple[tuple[int, int, int], ...]] = {
    d: _build_product_triples(d) for d in range(MAX_DEGREE + 1)
}


class ExpansionPointMismatch(ValueError):
    """Binary jet arithmetic on jets expanded at different points."""


def mul_coeffs(a: np.ndarray, b: np.ndarray, deg: int = MAX_DEGREE) -> np.ndarray:
    """Truncated Cauchy product of coefficient arrays shaped (..., C)."""
    out = np.zeros(np.broadcast(a[..., 0], b[..., 0]).shape + (N_COEFFS[deg],))
    for ka, kb, ko in PRODUCT_TRIPLES[deg]:
        out[..., ko] += a[..., ka] * b[..., kb]
    return out


def mul_adjoint_left(out_bar: np.ndarray, b: np.ndarray, deg: int = MAX_DEGREE) -> np.ndarray:
    """Adjoint of ``mul_coeffs`` with respect to its first argument."""
    a_bar = np.zeros(np.broadcast(out_bar[..., 0], b[..., 0]).shape + (N_COEFFS[deg],))
    for ka, kb, ko in PRODUCT_TRIPLES[deg]:
        a_bar[..., ka] += out_bar[..., ko] * b[..., kb]
    return a_bar


def tanh_derivatives(a0: np.ndarray) -> tuple[np.ndarray, ...]:
    """tanh and its first four derivatives at ``a0``.

    Uses the identities t' = 1 - t^2, t'' = -2 t t', t''' = -2 t'^2 - 2 t t'',
    t'''' = -6 t' t'' - 2 t t'''.
    """
    t = np.tanh(a0)
    t1 = 1.0 - t * t
    t2 = -2.0 * t * t1
    t3 = -2.0 * t1 * t1 - 2.0 * t * t2
    t4 = -6.0 * t1 * t2 - 2.0 * t * t3
    return t, t1, t2, t3, t4


def tanh_coeffs(a: np.ndarray, deg: int = MAX_DEGREE) -> np.ndarray:
    """Compose tanh with a jet: truncated series substitution.

    ``a`` has shape (..., C).  The composition is
    tanh(a0) + t'(a0) w + t''(a0)/2 w^2 + t'''(a0)/6 w^3 with w the
    zero-constant part of ``a``; powers of w are truncated at ``deg``.
    """
    out, _ = _tanh_forward(a, deg)
    return out


def _tanh_forward(a: np.ndarray, deg: int):
    t, t1, t2, t3, _ = tanh_derivatives(a[..., 0])
    out = np.empty_like(a)
    out[..., 0] = t
    if deg >= 1:
        out[..., 1] = t1 * a[..., 1]
        out[..., 2] = t1 * a[..., 2]
    if deg >= 2:
        w1, w2 = a[..., 1], a[..., 2]
        # w^2 has no constant or linear part, so quadratic slots mix only
        # the linear part of w.
        out[..., 3] = t1 * a[..., 3] + 0.5 * t2 * w1 * w1
        out[..., 4] = t1 * a[..., 4] + t2 * w1 * w2
        out[..., 5] = t1 * a[..., 5] + 0.5 * t2 * w2 * w2
    if deg >= 3:
        w1, w2, w3, w4, w5 = (a[..., k] for k in range(1, 6))
        c3 = t3 / 6.0
        out[..., 6] = t1 * a[..., 6] + t2 * w1 * w3 + c3 * w1**3
        out[..., 7] = t1 * a[..., 7] + t2 * (w1 * w4 + w2 * w3) + 3.0 * c3 * w1 * w1 * w2
        out[..., 8] = t1 * a[..., 8] + t2 * (w1 * w5 + w2 * w4) + 3.0 * c3 * w1 * w2 * w2
        out[..., 9] = t1 * a[..., 9] + t2 * w2 * w5 + c3 * w2**3
    return out, (a, t, t1, t2, t3)


def tanh_coeffs_with_cache(a: np.ndarray, deg: int):
    """Forward tanh composition returning a cache for the backward pass."""
    return _tanh_forward(a, deg)


def tanh_backward(cache, out_bar: np.ndarray, deg: int) -> np.ndarray:
    """Reverse-mode through ``tanh_coeffs``: input-coefficient adjoints."""
    a, t, t1, t2, t3 = cache
    t4 = -6.0 * t1 * t2 - 2.0 * t * t3
    c = N_COEFFS[deg]
    a_bar = np.empty_like(out_bar)

    # Every slot k >= 1 carries a direct t1 * a_k term.
    a_bar[..., 1:] = t1[..., None] * out_bar[..., 1:]
    # d out / d a0 = t1 e0 + t2 w + (t3/2) w^2 + (t4/6) w^3, dotted with out_bar.
    a0_bar = t1 * out_bar[..., 0]
    if deg >= 1:
        a0_bar += t2 * np.einsum("...k,...k->...", out_bar[..., 1:], a[..., 1:c])
    if deg >= 2:
        w1, w2 = a[..., 1], a[..., 2]
        q3, q4, q5 = w1 * w1, 2.0 * w1 * w2, w2 * w2
        a0_bar += 0.5 * t3 * (out_bar[..., 3] * q3 + out_bar[..., 4] * q4 + out_bar[..., 5] * q5)
        # w^2 quadratic slots depend on the linear part of w.
        a_bar[..., 1] += t2 * (w1 * out_bar[..., 3] + w2 * out_bar[..., 4])
        a_bar[..., 2] += t2 * (w1 * out_bar[..., 4] + w2 * out_bar[..., 5])
    if deg >= 3:
        w3, w4, w5 = a[..., 3], a[..., 4], a[..., 5]
        q6 = 2.0 * w1 * w3
        q7 = 2.0 * (w1 * w4 + w2 * w3)
        q8 = 2.0 * (w1 * w5 + w2 * w4)
        q9 = 2.0 * w2 * w5
        r6, r7, r8, r9 = w1**3, 3.0 * w1 * w1 * w2, 3.0 * w1 * w2 * w2, w2**3
        a0_bar += 0.5 * t3 * (
            out_bar[..., 6] * q6 + out_bar[..., 7] * q7
            + out_bar[..., 8] * q8 + out_bar[..., 9] * q9
        )
        a0_bar += (t4 / 6.0) * (
            out_bar[..., 6] * r6 + out_bar[..., 7] * r7
            + out_bar[..., 8] * r8 + out_bar[..., 9] * r9
        )
        c3 = t3 / 6.0
        a_bar[..., 1] += t2 * (w3 * out_bar[..., 6] + w4 * out_bar[..., 7] + w5 * out_bar[..., 8])
        a_bar[..., 1] += c3 * (
            3.0 * w1 * w1 * out_bar[..., 6]
            + 6.0 * w1 * w2 * out_bar[..., 7]
            + 3.0 * w2 * w2 * out_bar[..., 8]
        )
        a_bar[..., 2] += t2 * (w3 * out_bar[..., 7] + w4 * out_bar[..., 8] + w5 * out_bar[..., 9])
        a_bar[..., 2] += c3 * (
            3.0 * w1 * w1 * out_bar[..., 7]
            + 6.0 * w1 * w2 * out_bar[..., 8]
            + 3.0 * w2 * w2 * out_bar[..., 9]
        )
        a_bar[..., 3] += t2 * (w1 * out_bar[..., 6] + w2 * out_bar[..., 7])
        a_bar[..., 4] += t2 * (w1 * out_bar[..., 7] + w2 * out_bar[..., 8])
        a_bar[..., 5] += t2 * (w1 * out_bar[..., 8] + w2 * out_bar[..., 9])
    a_bar[..., 0] = a0_bar
    return a_bar


def seed_coeffs(point, which: str, deg: int = MAX_DEGREE, value: float = 0.0) -> np.ndarray:
    """Coefficient array of a seed jet at ``point``.

    ``which`` is "first" or "second" for the input variables (value = the
    coordinate, unit first derivative) or "constant" for a constant jet of
    the given ``value``.
    """
    c = np.zeros(N_COEFFS[deg])
    z1, z2 = float(point[0]), float(point[1])
    if which == "first":
        c[0] = z1
        if deg >= 1:
            c[1] = 1.0
    elif which == "second":
        c[0] = z2
        if deg >= 1:
            c[2] = 1.0
    elif which == "constant":
        c[0] = float(value)
    else:
        raise ValueError(f"unknown seed kind {which!r}")
    return c


@dataclass(frozen=True)
class Jet:
    """Degree-3 jet: 10 Taylor-normalized coefficients plus expansion point."""

    coeffs: np.ndarray
    point: tuple[float, float]

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (10,):
            raise ValueError(f"jet must hold exactly 10 coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "point", (float(self.point[0]), float(self.point[1])))

    def _check_point(self, other: "Jet"):
        if self.point != other.point:
            raise ExpansionPointMismatch(
                f"expansion points differ: {self.point} vs {other.point}"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_point(other)
            return Jet(self.coeffs + other.coeffs, self.point)
        c = self.coeffs.copy()
        c[0] += float(other)
        return Jet(c, self.point)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __neg__(self):
        return Jet(-self.coeffs, self.point)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_point(other)
            return Jet(mul_coeffs(self.coeffs, other.coeffs), self.point)
        return Jet(self.coeffs * float(other), self.point)

    __rmul__ = __mul__

    def tanh(self) -> "Jet":
        return Jet(tanh_coeffs(self.coeffs), self.point)

    def extract(self, i: int, j: int) -> float:
        """Partial derivative d^{i+j}u / dz1^i dz2^j (factorials restored)."""
        if (i, j) not in SLOT:
            raise ValueError(f"multi-index ({i}, {j}) out of range (total order <= 3)")
        k = SLOT[(i, j)]
        return float(self.coeffs[k] * FACTORIALS[k])

    @property
    def value(self) -> float:
        return float(self.coeffs[0])


def jet_seed(point, which: str, value: float = 0.0) -> Jet:
    """Seed jet for one input variable or a constant at ``point``."""
    return Jet(seed_coeffs(point, which, MAX_DEGREE, value), tuple(point))


def jet_arith(op: str, a: Jet, b=None) -> Jet:
    """Jet arithmetic dispatch: add, sub, mul, scale, neg."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "scale":
        return a * float(b)
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


def jet_tanh(a: Jet) -> Jet:
    return a.tanh()


def jet_extract(a: Jet, multi_index) -> float:
    i, j = multi_index
    return a.extract(i, j)
