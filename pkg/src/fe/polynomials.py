"""Monomial spaces P_k, Q_k and the serendipity space S_k.

S_k keeps the monomials of Q_k whose superlinear degree (the sum of the
exponents that are at least 2) does not exceed k. Monomials are kept in graded
lexicographic order so every downstream numbering is deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

FAMILIES = ("P", "Q", "S")


@dataclass(frozen=True, order=True)
class Monomial:
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(e < 0 for e in self.exponents):
            raise ValueError(f"Monomial exponents must be >= 0, got {self.exponents}")

    @property
    def dim(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def __str__(self) -> str:
        names = "xyz"
        parts = []
        for var, e in zip(names, self.exponents):
            if e == 1:
                parts.append(var)
            elif e > 1:
                parts.append(f"{var}^{e}")
        return "*".join(parts) or "1"


def superlinear_degree(m: Monomial | tuple[int, ...]) -> int:
    exps = m.exponents if isinstance(m, Monomial) else tuple(m)
    return sum(e for e in exps if e >= 2)


def _check(family: str, k: int, dim: int) -> str:
    fam = str(family).upper()
    if fam not in FAMILIES:
        raise ValueError(f"Unknown family '{family}', expected one of {FAMILIES}")
    if k < 1:
        raise ValueError(f"Polynomial degree must be >= 1, got {k}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return fam


def graded_lex_key(exps: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    return (sum(exps), tuple(-e for e in exps))


@lru_cache(maxsize=None)
def _exponent_list(family: str, k: int, dim: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for exps in itertools.product(range(k + 1), repeat=dim):
        if family == "P" and sum(exps) > k:
            continue
        if family == "S" and superlinear_degree(exps) > k:
            continue
        out.append(exps)
    return tuple(sorted(out, key=graded_lex_key))


def enumerate_monomials(family: str, k: int, dim: int) -> list[Monomial]:
    fam = _check(family, k, dim)
    return [Monomial(e) for e in _exponent_list(fam, k, dim)]


def exponent_array(family: str, k: int, dim: int) -> np.ndarray:
    fam = _check(family, k, dim)
    return np.asarray(_exponent_list(fam, k, dim), dtype=np.int64).reshape(-1, dim)


def dim_space(family: str, k: int, dim: int) -> int:
    """Closed-form dimension; S_k uses the binomial sum over the number of superlinear variables."""
    fam = _check(family, k, dim)
    if fam == "P":
        return comb(k + dim, dim)
    if fam == "Q":
        return (k + 1) ** dim
    return sum(
        2 ** (dim - d) * comb(dim, d) * comb(k - d, d) for d in range(min(dim, k // 2) + 1)
    )


@dataclass(frozen=True)
class PolySpace:
    family: str
    degree: int
    dim: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", _check(self.family, self.degree, self.dim))

    @property
    def monomials(self) -> list[Monomial]:
        return enumerate_monomials(self.family, self.degree, self.dim)

    @property
    def exponents(self) -> np.ndarray:
        return exponent_array(self.family, self.degree, self.dim)

    def __len__(self) -> int:
        return dim_space(self.family, self.degree, self.dim)

    @property
    def name(self) -> str:
        return f"{self.family}_{self.degree}({self.dim}D)"


# ─── monomial evaluation ──────────────────────────────────────────────


def _powers(points: np.ndarray, max_exp: int) -> np.ndarray:
    # (p, dim, max_exp + 1) table of x_a ** e
    return points[:, :, None] ** np.arange(max_exp + 1)[None, None, :]


def monomial_values(exponents: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Values of every monomial at every point, shape (points, monomials)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    pw = _powers(points, int(exponents.max(initial=0)))
    out = np.ones((points.shape[0], exponents.shape[0]))
    for a in range(exponents.shape[1]):
        out *= pw[:, a, exponents[:, a]]
    return out


def monomial_gradients(exponents: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Gradients of every monomial, shape (points, monomials, dim)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dim = exponents.shape[1]
    pw = _powers(points, int(exponents.max(initial=0)))
    out = np.empty((points.shape[0], exponents.shape[0], dim))
    for d in range(dim):
        g = np.ones((points.shape[0], exponents.shape[0]))
        for a in range(dim):
            if a == d:
                e = exponents[:, a]
                g *= e[None, :] * pw[:, a, np.maximum(e - 1, 0)]
            else:
                g *= pw[:, a, exponents[:, a]]
        out[:, :, d] = g
    return out
