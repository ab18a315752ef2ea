"""Fixed-point number representation with saturating arithmetic.

Values are stored as raw integers against a Q-format (total bits,
fraction bits, signedness).  Overflow always saturates, never wraps.
Constants can be decomposed into canonical-signed-digit (CSD) form so a
multiply becomes a handful of shifts and adds, mirroring a
multiplierless hardware datapath.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

ArithKind = Literal["add", "sub", "mul"]


@dataclass(frozen=True)
class QFormat:
    """Q-format descriptor: total bit count, fraction bits, signedness."""

    total_bits: int
    frac_bits: int
    signed: bool = True

    def __post_init__(self) -> None:
        if not 2 <= self.total_bits <= 32:
            raise ValueError(f"total_bits must be in 2..32, got {self.total_bits}")
        if not 0 <= self.frac_bits < self.total_bits:
            raise ValueError(
                f"frac_bits must be in 0..{self.total_bits - 1}, got {self.frac_bits}"
            )

    @property
    def raw_min(self) -> int:
        return -(1 << (self.total_bits - 1)) if self.signed else 0

    @property
    def raw_max(self) -> int:
        if self.signed:
            return (1 << (self.total_bits - 1)) - 1
        return (1 << self.total_bits) - 1

    @property
    def lsb(self) -> float:
        """Weight of one raw unit, 2^-frac_bits."""
        return 2.0 ** -self.frac_bits

    @property
    def min_value(self) -> float:
        return self.raw_min * self.lsb

    @property
    def max_value(self) -> float:
        return self.raw_max * self.lsb


@dataclass(frozen=True)
class FixedValue:
    """One fixed-point sample: raw integer plus its format."""

    raw: int
    format: QFormat

    def __post_init__(self) -> None:
        if not self.format.raw_min <= self.raw <= self.format.raw_max:
            raise ValueError(
                f"raw {self.raw} outside format range "
                f"[{self.format.raw_min}, {self.format.raw_max}]"
            )


@dataclass(frozen=True)
class ShiftAddApprox:
    """A constant as a signed sum of powers of two: value = sum s * 2^-k.

    Terms are (sign, shift) with shifts strictly increasing and at most
    one term per shift, so the value is realizable as one shifter and
    one adder per term.
    """

    terms: tuple[tuple[int, int], ...]
    target: float

    def __post_init__(self) -> None:
        shifts = [k for _, k in self.terms]
        if shifts != sorted(set(shifts)):
            raise ValueError(f"shifts must be strictly increasing: {shifts}")
        if any(s not in (-1, 1) or k < 0 for s, k in self.terms):
            raise ValueError(f"terms must be (+-1, shift>=0): {self.terms}")

    @property
    def value(self) -> float:
        return sum(s * 2.0 ** -k for s, k in self.terms)

    @property
    def error(self) -> float:
        return abs(self.target - self.value)


def saturate(raw: int, fmt: QFormat) -> int:
    """Clamp a raw integer into the format's representable range."""
    return min(max(raw, fmt.raw_min), fmt.raw_max)


def _rshift_round_even(v: int, s: int) -> int:
    """Arithmetic right shift by s with round-to-nearest, ties to even."""
    if s <= 0:
        return v << -s
    q = v >> s
    r = v - (q << s)
    half = 1 << (s - 1)
    if r > half or (r == half and (q & 1)):
        q += 1
    return q


def quantize(x: float, fmt: QFormat) -> FixedValue:
    """Round a real to the raw grid (nearest even), saturating at the edges."""
    scaled = x * (1 << fmt.frac_bits)
    # round() on float is round-half-even, matching the grid convention
    raw = round(scaled)
    return FixedValue(saturate(raw, fmt), fmt)


def to_real(v: FixedValue) -> float:
    """Exact real value of a fixed-point sample."""
    return v.raw * v.format.lsb


def fx_arith(a: FixedValue, b: FixedValue, kind: ArithKind) -> FixedValue:
    """Saturating add/sub/mul of two values sharing a format.

    Multiplication computes the exact double-width product, then
    rescales back to the operand format with round-to-nearest-even.
    """
    if a.format != b.format:
        raise ValueError(f"format mismatch: {a.format} vs {b.format}")
    fmt = a.format
    if kind == "add":
        raw = a.raw + b.raw
    elif kind == "sub":
        raw = a.raw - b.raw
    elif kind == "mul":
        raw = _rshift_round_even(a.raw * b.raw, fmt.frac_bits)
    else:
        raise ValueError(f"unknown arithmetic kind: {kind!r}")
    return FixedValue(saturate(raw, fmt), fmt)


def approx_csd(c: float, max_terms: int, max_shift: int) -> ShiftAddApprox:
    """Greedy CSD decomposition of a constant |c| < 2.

    Repeatedly appends the signed power of two closest to the residual
    (ties broken toward the smaller shift) until the residual is zero,
    no term improves it, or max_terms is reached.
    """
    if not abs(c) < 2:
        raise ValueError(f"|c| must be < 2, got {c}")
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    if not 0 <= max_shift <= 31:
        raise ValueError("max_shift must be in 0..31")

    terms: list[tuple[int, int]] = []
    residual = c
    for _ in range(max_terms):
        if residual == 0.0:
            break
        sign = 1 if residual > 0 else -1
        best_k = None
        best_err = abs(residual)  # only accept strict improvement
        for k in range(max_shift + 1):
            err = abs(residual - sign * 2.0 ** -k)
            if err < best_err:
                best_err = err
                best_k = k
        if best_k is None:
            break
        if terms and best_k <= terms[-1][1]:
            break
        terms.append((sign, best_k))
        residual -= sign * 2.0 ** -best_k
    return ShiftAddApprox(tuple(terms), c)


def apply_shift_add(x: FixedValue, a: ShiftAddApprox) -> FixedValue:
    """Multiply by a CSD constant using arithmetic shifts only.

    Each partial is x >> shift with floor semantics (what a hardware
    arithmetic shifter does); the signed sum saturates to x's format.
    """
    acc = 0
    for sign, shift in a.terms:
        acc += sign * (x.raw >> shift)
    return FixedValue(saturate(acc, x.format), x.format)


# ---------------------------------------------------------------------------
# Vectorized raw-integer helpers used by the bit-accurate pipeline.
# Same semantics as the scalar operations, on int64 arrays.


def quantize_array(x: np.ndarray, fmt: QFormat) -> np.ndarray:
    """Vectorized quantize: real array -> saturated raw int64 array."""
    raw = np.rint(np.asarray(x, dtype=np.float64) * (1 << fmt.frac_bits))
    return np.clip(raw, fmt.raw_min, fmt.raw_max).astype(np.int64)


def to_real_array(raw: np.ndarray, fmt: QFormat) -> np.ndarray:
    return raw.astype(np.float64) * fmt.lsb


def saturate_array(raw: np.ndarray, fmt: QFormat) -> np.ndarray:
    return np.clip(raw, fmt.raw_min, fmt.raw_max)


def rshift_round_even_array(v: np.ndarray, s: int) -> np.ndarray:
    """Vectorized arithmetic right shift with round-to-nearest-even."""
    if s <= 0:
        return v << -s
    q = v >> s
    r = v - (q << s)
    half = 1 << (s - 1)
    bump = (r > half) | ((r == half) & ((q & 1) == 1))
    return q + bump


def mul_raw_array(a: np.ndarray, b: np.ndarray, fmt: QFormat) -> np.ndarray:
    """Saturating fixed-point multiply on raw arrays sharing a format."""
    if fmt.total_bits * 2 > 62:
        raise ValueError("product would overflow int64")
    prod = a.astype(np.int64) * b.astype(np.int64)
    return saturate_array(rshift_round_even_array(prod, fmt.frac_bits), fmt)


def shift_add_raw_array(raw: np.ndarray, a: ShiftAddApprox, fmt: QFormat) -> np.ndarray:
    """Vectorized apply_shift_add on raw int64 arrays."""
    acc = np.zeros_like(raw)
    for sign, shift in a.terms:
        acc = acc + sign * (raw >> shift)
    return saturate_array(acc, fmt)
