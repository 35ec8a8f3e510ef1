"""Critical-count algebra: Morse/Poincare polynomials, Betti b1, genus.

Polynomials are formal degree-2 coefficient triples; nothing is ever
evaluated at a numeric t. All operations are exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

INVALID_ODD_B1 = "odd_b1"
INVALID_NEGATIVE_B1 = "negative_b1"
INVALID_DEGENERATE = "degenerate_detection"


@dataclass(frozen=True)
class MorsePolynomial:
    """Coefficients (t^0, t^1, t^2) counting minima, saddles, maxima."""

    m0: int
    m1: int
    m2: int

    def __post_init__(self):
        if min(self.m0, self.m1, self.m2) < 0:
            raise ValueError("Morse coefficients must be nonnegative")

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.m0, self.m1, self.m2)


@dataclass(frozen=True)
class PoincarePolynomial:
    """Betti numbers (b0, b1, b2) of the reference surface."""

    b0: int
    b1: int
    b2: int

    def __post_init__(self):
        if min(self.b0, self.b1, self.b2) < 0:
            raise ValueError("Betti numbers must be nonnegative")

    @classmethod
    def for_genus(cls, genus: int) -> "PoincarePolynomial":
        """Closed orientable surface of the given genus: (1, 2g, 1)."""
        if genus < 0:
            raise ValueError("genus must be nonnegative")
        return cls(1, 2 * genus, 1)

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.b0, self.b1, self.b2)


@dataclass(frozen=True)
class BettiOne:
    """b1 computed from counts, with a parity/sign validity verdict."""

    value: int
    valid: bool
    reason: Optional[str] = None


@dataclass(frozen=True)
class GenusEstimate:
    genus: Optional[int]
    valid: bool
    reason: Optional[str] = None


def morse_polynomial(counts: Tuple[int, int, int]) -> MorsePolynomial:
    """Counts (n_min, n_saddle, n_max) become coefficients of t^0, t^1, t^2."""
    n_min, n_saddle, n_max = counts
    return MorsePolynomial(int(n_min), int(n_saddle), int(n_max))


def euler_characteristic(counts: Tuple[int, int, int]) -> int:
    """Alternating sum n_min - n_saddle + n_max."""
    n_min, n_saddle, n_max = counts
    return int(n_min) - int(n_saddle) + int(n_max)


def betti_one(counts: Tuple[int, int, int]) -> BettiOne:
    """b1 = 2 - n_min + n_saddle - n_max, assuming b0 = b2 = 1.

    Valid only when the result is even and nonnegative; a single missed or
    spurious critical point flips the parity, so oddness marks a bad
    detection rather than a genuine surface.
    """
    n_min, n_saddle, n_max = (int(c) for c in counts)
    if min(n_min, n_saddle, n_max) < 0:
        raise ValueError("counts must be nonnegative")
    b1 = 2 - n_min + n_saddle - n_max
    if b1 < 0:
        return BettiOne(b1, False, INVALID_NEGATIVE_B1)
    if b1 % 2 != 0:
        return BettiOne(b1, False, INVALID_ODD_B1)
    return BettiOne(b1, True)


def genus_estimate(b1: BettiOne) -> GenusEstimate:
    """genus = b1 / 2 for a valid even b1; invalidity propagates."""
    if not b1.valid:
        return GenusEstimate(None, False, b1.reason)
    return GenusEstimate(b1.value // 2, True)


def weak_inequality(m: MorsePolynomial, p: PoincarePolynomial) -> bool:
    """Coefficientwise m_k >= b_k."""
    return m.m0 >= p.b0 and m.m1 >= p.b1 and m.m2 >= p.b2


def strong_inequality_q(
    m: MorsePolynomial, p: PoincarePolynomial
) -> Optional[Tuple[int, int]]:
    """Solve m(t) - p(t) = (1+t) q(t) for q with nonnegative coefficients.

    Returns (q0, q1) or None when no such q exists, which signals an
    inconsistent polynomial pair.
    """
    q0 = m.m0 - p.b0
    q1 = m.m1 - p.b1 - q0
    if q0 < 0 or q1 < 0 or m.m2 - p.b2 != q1:
        return None
    return (q0, q1)


def is_perfect_lacunary(m: MorsePolynomial) -> bool:
    """True when consecutive-coefficient products vanish.

    A vanishing m0*m1 or m1*m2 forces every difference in the strong
    inequality to zero, so the coefficients equal the Betti numbers.
    """
    return m.m0 * m.m1 == 0 or m.m1 * m.m2 == 0
