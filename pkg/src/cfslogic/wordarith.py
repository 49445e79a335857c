"""Gate-level datapath generators: adders, saturators, constant
multipliers, comparators, multiplexers, ReLU.

Words are little-endian literal lists with a fixed-point format attached.
The canonical formats: W8F6 for weights, A16F6 for activations, ACC24F12
for the accumulator.  The scalar ``fx_*`` helpers mirror the generated
structures step for step and serve as the normative oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import CONST0, CONST1, Circuit, lit_not


@dataclass(frozen=True)
class FixedFormat:
    total_bits: int
    frac_bits: int
    signed: bool = True

    def __post_init__(self):
        if not 0 <= self.frac_bits < self.total_bits:
            raise ValueError("need 0 <= frac_bits < total_bits")

    @property
    def min_code(self):
        return -(1 << (self.total_bits - 1)) if self.signed else 0

    @property
    def max_code(self):
        return (1 << (self.total_bits - 1)) - 1 if self.signed else (1 << self.total_bits) - 1


W8F6 = FixedFormat(8, 6)
A16F6 = FixedFormat(16, 6)
ACC24F12 = FixedFormat(24, 12)


@dataclass
class BitWord:
    bits: list[int]
    fmt: FixedFormat

    def __post_init__(self):
        if len(self.bits) != self.fmt.total_bits:
            raise ValueError("bit count does not match format width")

    @property
    def width(self):
        return len(self.bits)

    @property
    def sign(self):
        return self.bits[-1]


def const_word(c: Circuit, value: int, fmt: FixedFormat) -> BitWord:
    if not fmt.min_code <= value <= fmt.max_code:
        raise ValueError(f"{value} not representable in {fmt}")
    return BitWord([CONST1 if (value >> i) & 1 else CONST0 for i in range(fmt.total_bits)], fmt)


def _check_widths(a: BitWord, b: BitWord):
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")


def _full_add(c, a, b, cin):
    axb = c.add_xor(a, b)
    s = c.add_xor(axb, cin)
    carry = lit_not(c.add_and(lit_not(c.add_and(a, b)), lit_not(c.add_and(cin, axb))))
    return s, carry


def _or(c, a, b):
    return lit_not(c.add_and(lit_not(a), lit_not(b)))


def add_words(c: Circuit, a: BitWord, b: BitWord) -> BitWord:
    """Ripple-carry add modulo 2^width."""
    _check_widths(a, b)
    bits, _ = _ripple(c, a.bits, b.bits, CONST0)
    return BitWord(bits, a.fmt)


def _ripple(c, abits, bbits, cin):
    out = []
    carry = cin
    for x, y in zip(abits, bbits):
        s, carry = _full_add(c, x, y, carry)
        out.append(s)
    return out, carry


def _saturate_signed(c, sum_bits, ovf, sign_a):
    # on overflow the result takes the saturated value of the operand sign:
    # 100..0 when negative, 011..1 when positive
    w = len(sum_bits)
    sat = [lit_not(sign_a)] * (w - 1) + [sign_a]
    return [_mux(c, ovf, sat[i], sum_bits[i]) for i in range(w)]


def _mux(c, sel, a, b):
    """sel ? a : b"""
    return c.add_xor(b, c.add_and(sel, c.add_xor(a, b)))


def add_saturating(c: Circuit, a: BitWord, b: BitWord) -> BitWord:
    """Signed saturating add: clamp(a+b, min, max)."""
    _check_widths(a, b)
    sum_bits, _ = _ripple(c, a.bits, b.bits, CONST0)
    # overflow iff operand signs agree and differ from the result sign
    same = lit_not(c.add_xor(a.sign, b.sign))
    ovf = c.add_and(same, c.add_xor(sum_bits[-1], a.sign))
    return BitWord(_saturate_signed(c, sum_bits, ovf, a.sign), a.fmt)


def sub_saturating(c: Circuit, a: BitWord, b: BitWord) -> BitWord:
    """Signed saturating subtract: clamp(a-b, min, max)."""
    _check_widths(a, b)
    nb = [lit_not(x) for x in b.bits]
    sum_bits, _ = _ripple(c, a.bits, nb, CONST1)
    diff = lit_not(c.add_xor(a.sign, b.sign))
    ovf = c.add_and(lit_not(diff), c.add_xor(sum_bits[-1], a.sign))
    return BitWord(_saturate_signed(c, sum_bits, ovf, a.sign), a.fmt)


def add_saturating_unsigned(c: Circuit, a: BitWord, b: BitWord) -> BitWord:
    """Unsigned saturating add: carry-out forces all ones."""
    _check_widths(a, b)
    sum_bits, carry = _ripple(c, a.bits, b.bits, CONST0)
    return BitWord([_or(c, s, carry) for s in sum_bits], a.fmt)


@dataclass(frozen=True)
class CsdDigit:
    sign: int  # +1 or -1
    shift: int


def csd_digits(value: int) -> list[CsdDigit]:
    """Canonical signed-digit recoding: minimal nonzero digits, no two at
    adjacent shifts, ascending shift order."""
    digits = []
    shift = 0
    c = int(value)
    while c:
        if c & 1:
            d = 2 - (c & 3)  # +1 if c % 4 == 1, -1 if c % 4 == 3
            digits.append(CsdDigit(d, shift))
            c -= d
        c >>= 1
        shift += 1
    return digits


def sign_extend(word: BitWord, fmt: FixedFormat) -> BitWord:
    k = fmt.total_bits - word.width
    if k < 0:
        raise ValueError("cannot narrow")
    return BitWord(list(word.bits) + [word.sign] * k, fmt)


def shift_left(word: BitWord, k: int) -> BitWord:
    if k == 0:
        return word
    return BitWord([CONST0] * k + word.bits[: word.width - k], word.fmt)


def mul_const_csd(c: Circuit, u: BitWord, weight_code: int) -> BitWord:
    """weight_code * u into the 24-bit accumulator format, built shift-add
    from the CSD recoding (descending shift order, saturating steps)."""
    if weight_code == 0:
        return const_word(c, 0, ACC24F12)
    ue = sign_extend(u, ACC24F12)
    acc = const_word(c, 0, ACC24F12)
    for d in sorted(csd_digits(weight_code), key=lambda d: -d.shift):
        term = shift_left(ue, d.shift)
        acc = add_saturating(c, acc, term) if d.sign > 0 else sub_saturating(c, acc, term)
    return acc


def mul_const_array(c: Circuit, u: BitWord, weight_code: int) -> BitWord:
    """Same function as :func:`mul_const_csd` but schoolbook structure: one
    shifted partial product per set bit of |weight|, ascending shifts,
    negation at the end for negative weights."""
    if weight_code == 0:
        return const_word(c, 0, ACC24F12)
    ue = sign_extend(u, ACC24F12)
    acc = const_word(c, 0, ACC24F12)
    m = abs(weight_code)
    shift = 0
    while m:
        if m & 1:
            acc = add_saturating(c, acc, shift_left(ue, shift))
        m >>= 1
        shift += 1
    if weight_code < 0:
        acc = sub_saturating(c, const_word(c, 0, ACC24F12), acc)
    return acc


def relu(c: Circuit, x: BitWord) -> BitWord:
    """max(0, x): mux on the sign bit selecting zero or x."""
    zero = const_word(c, 0, x.fmt)
    return mux_word(c, x.sign, zero, x)


def rescale_24_to_16(c: Circuit, acc: BitWord) -> BitWord:
    """Arithmetic shift right by 6 (truncation toward minus infinity),
    then signed saturation to 16 bits."""
    if acc.fmt != ACC24F12:
        raise ValueError("expected ACC24F12 word")
    b = acc.bits
    sign = b[23]
    # representable iff bits 21..23 agree (sign extension of bit 21)
    ovf = _or(c, c.add_xor(sign, b[22]), c.add_xor(sign, b[21]))
    sat = [lit_not(sign)] * 15 + [sign]
    bits = [_mux(c, ovf, sat[i], b[i + 6]) for i in range(16)]
    return BitWord(bits, A16F6)


def compare_leq_const(c: Circuit, x: BitWord, t: int) -> int:
    """Literal true iff unsigned byte word x <= t."""
    if x.fmt.signed or x.width != 8:
        raise ValueError("expected unsigned 8-bit word")
    if not 0 <= t <= 255:
        raise ValueError("threshold out of range")
    res = CONST1
    for i, xb in enumerate(x.bits):  # LSB to MSB
        if (t >> i) & 1:
            res = lit_not(c.add_and(xb, lit_not(res)))
        else:
            res = c.add_and(lit_not(xb), res)
    return res


def mux_word(c: Circuit, sel: int, a: BitWord, b: BitWord) -> BitWord:
    """sel ? a : b, bitwise 2:1 mux."""
    _check_widths(a, b)
    return BitWord([_mux(c, sel, x, y) for x, y in zip(a.bits, b.bits)], a.fmt)


def simulate_word(word: BitWord, node_values, signed=None) -> int:
    """Decode a word given scalar per-node values (tests/oracles)."""
    if signed is None:
        signed = word.fmt.signed
    v = 0
    for i, x in enumerate(word.bits):
        v |= (node_values[x >> 1] ^ (x & 1)) << i
    if signed and v >> (word.width - 1):
        v -= 1 << word.width
    return v


# -- scalar fixed-point oracles -----------------------------------------


def fx_wrap(v: int, width: int) -> int:
    v &= (1 << width) - 1
    return v - (1 << width) if v >> (width - 1) else v


def fx_sat(v: int, width: int) -> int:
    lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    return min(max(v, lo), hi)


def fx_add_sat(a: int, b: int, width: int = 24) -> int:
    return fx_sat(a + b, width)


def fx_mul_const_csd(u: int, weight_code: int, width: int = 24) -> int:
    acc = 0
    for d in sorted(csd_digits(weight_code), key=lambda d: -d.shift):
        term = fx_wrap(u << d.shift, width)
        acc = fx_sat(acc + d.sign * term, width)
    return acc


def fx_mul_const_array(u: int, weight_code: int, width: int = 24) -> int:
    acc = 0
    m = abs(weight_code)
    shift = 0
    while m:
        if m & 1:
            acc = fx_sat(acc + fx_wrap(u << shift, width), width)
        m >>= 1
        shift += 1
    return fx_sat(-acc, width) if weight_code < 0 else acc


def fx_rescale_24_to_16(acc: int) -> int:
    return fx_sat(acc >> 6, 16)
