"""Polynomials in z and zbar with complex coefficients.

A ``ZPolynomial`` is one complex coordinate of a disk map. Exponents are
exact integers; coefficients are double-precision complex numbers. The
canonical form drops coefficients that are exactly zero and nothing else,
so a parsed polynomial prints back to the same text.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Mapping, Union

import numpy as np

from singlink.common import InputError

Scalar = Union[int, float, complex]
Term = tuple[int, int, complex]


class ZeroPolynomial(InputError):
    """Operation needs a nonzero polynomial"""


def _canonical(pairs) -> tuple[Term, ...]:
    merged: dict[tuple[int, int], complex] = {}
    for j, k, c in pairs:
        if j < 0 or k < 0:
            raise ValueError(f"negative exponent in term z^{j} zbar^{k}")
        merged[(j, k)] = merged.get((j, k), 0j) + complex(c)
    return tuple(
        (j, k, c) for (j, k), c in sorted(merged.items()) if c != 0
    )


@dataclass(frozen=True)
class ZPolynomial:
    """Finite sum of c * z^j * zbar^k, stored as sorted (j, k, c) triples."""

    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", _canonical(self.terms))

    @classmethod
    def from_dict(cls, coefficients: Mapping[tuple[int, int], Scalar]) -> ZPolynomial:
        return cls(tuple((j, k, c) for (j, k), c in coefficients.items()))

    @classmethod
    def monomial(cls, j: int, k: int = 0, coefficient: Scalar = 1.0) -> ZPolynomial:
        return cls(((j, k, complex(coefficient)),))

    @classmethod
    def zero(cls) -> ZPolynomial:
        return cls()

    def as_dict(self) -> dict[tuple[int, int], complex]:
        return {(j, k): c for j, k, c in self.terms}

    def coefficient(self, j: int, k: int) -> complex:
        return self.as_dict().get((j, k), 0j)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((j + k for j, k, _ in self.terms), default=-1)

    def lowest_order(self) -> tuple[int, ZPolynomial]:
        """Lowest total degree and the part of exactly that degree."""
        if not self.terms:
            raise ZeroPolynomial("lowest order of the zero polynomial")
        low = min(j + k for j, k, _ in self.terms)
        return low, ZPolynomial(tuple(t for t in self.terms if t[0] + t[1] == low))

    def truncated(self, max_degree: int) -> ZPolynomial:
        """Terms of total degree <= max_degree."""
        return ZPolynomial(tuple(t for t in self.terms if t[0] + t[1] <= max_degree))

    # algebra

    def __add__(self, other: ZPolynomial | Scalar) -> ZPolynomial:
        other = _coerce(other)
        return ZPolynomial(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> ZPolynomial:
        return ZPolynomial(tuple((j, k, -c) for j, k, c in self.terms))

    def __sub__(self, other: ZPolynomial | Scalar) -> ZPolynomial:
        return self + (-_coerce(other))

    def __rsub__(self, other: ZPolynomial | Scalar) -> ZPolynomial:
        return _coerce(other) - self

    def __mul__(self, other: ZPolynomial | Scalar) -> ZPolynomial:
        other = _coerce(other)
        return ZPolynomial(
            tuple(
                (j1 + j2, k1 + k2, c1 * c2)
                for j1, k1, c1 in self.terms
                for j2, k2, c2 in other.terms
            )
        )

    __rmul__ = __mul__

    def conj_poly(self) -> ZPolynomial:
        """Polynomial whose values are the conjugates of this one's."""
        return ZPolynomial(tuple((k, j, c.conjugate()) for j, k, c in self.terms))

    def scale_argument(self, nu: complex) -> ZPolynomial:
        """The polynomial z -> p(nu * z)."""
        nu = complex(nu)
        nub = nu.conjugate()
        return ZPolynomial(tuple((j, k, c * nu**j * nub**k) for j, k, c in self.terms))

    def wirtinger(self, which: Literal["dz", "dzbar"]) -> ZPolynomial:
        if which == "dz":
            return ZPolynomial(tuple((j - 1, k, j * c) for j, k, c in self.terms if j))
        if which == "dzbar":
            return ZPolynomial(tuple((j, k - 1, k * c) for j, k, c in self.terms if k))
        raise ValueError(f"unknown Wirtinger derivative {which!r}")

    def d_dx(self) -> ZPolynomial:
        return self.wirtinger("dz") + self.wirtinger("dzbar")

    def d_dy(self) -> ZPolynomial:
        return 1j * (self.wirtinger("dz") - self.wirtinger("dzbar"))

    # evaluation

    @cached_property
    def _rows(self) -> list[list[complex]]:
        """Dense coefficient rows indexed by the zbar exponent."""
        if not self.terms:
            return []
        max_k = max(k for _, k, _ in self.terms)
        rows: list[list[complex]] = [[] for _ in range(max_k + 1)]
        for j, k, c in self.terms:
            row = rows[k]
            if len(row) <= j:
                row.extend([0j] * (j + 1 - len(row)))
            row[j] = c
        return rows

    def evaluate(self, z):
        """Value at z; z may be a complex scalar or a numpy array."""
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        if not self.terms:
            return acc[()] if acc.ndim == 0 else acc
        zb = np.conj(z)
        for row in reversed(self._rows):
            inner = np.zeros_like(z)
            for c in reversed(row):
                inner = inner * z + c
            acc = acc * zb + inner
        return acc[()] if acc.ndim == 0 else acc

    __call__ = evaluate

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for n, (j, k, c) in enumerate(self.terms):
            sign, body = _format_term(j, k, c)
            if n == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f" {sign} {body}")
        return "".join(out)


def _coerce(value: ZPolynomial | Scalar) -> ZPolynomial:
    if isinstance(value, ZPolynomial):
        return value
    return ZPolynomial(((0, 0, complex(value)),))


def _format_real(x: float) -> str:
    text = repr(float(x))
    if text in ("inf", "nan", "-inf", "-nan"):
        raise ValueError(f"cannot print non-finite coefficient {text}")
    return text


def _format_term(j: int, k: int, c: complex) -> tuple[str, str]:
    factors = []
    if j:
        factors.append("z" if j == 1 else f"z^{j}")
    if k:
        factors.append("zbar" if k == 1 else f"zbar^{k}")
    monomial = "*".join(factors)
    if c.imag == 0:
        sign = "-" if c.real < 0 else "+"
        magnitude = abs(c.real)
        if magnitude == 1.0 and monomial:
            return sign, monomial
        coef = _format_real(magnitude)
    else:
        sign = "+"
        im_sign = "-" if c.imag < 0 else "+"
        coef = f"({_format_real(c.real)}{im_sign}{_format_real(abs(c.imag))}i)"
    return sign, f"{coef}*{monomial}" if monomial else coef


Z = ZPolynomial.monomial(1, 0)
ZBAR = ZPolynomial.monomial(0, 1)
