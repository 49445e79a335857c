"""Compile model descriptions into XAIG circuits.

All compiled circuits share one input convention: 8 primary inputs per
feature byte, feature-major, least-significant bit first (matching
:meth:`cfslogic.sim.Stimulus.from_features`).  Classifier outputs are a
group of 10 buses named ``class0`` .. ``class9`` in class order.
"""

from __future__ import annotations

import numpy as np

from .circuit import CONST0, CONST1, Circuit, decompose_xors, lit_not
from .models import PIXEL_TO_A16, ForestModel, LutModel, QuantizedMlp, TreeLeaf
from .wordarith import (
    A16F6,
    ACC24F12,
    BitWord,
    FixedFormat,
    add_saturating,
    add_saturating_unsigned,
    compare_leq_const,
    const_word,
    mul_const_array,
    mul_const_csd,
    mux_word,
    relu,
    rescale_24_to_16,
)

U8 = FixedFormat(8, 0, signed=False)
U16 = FixedFormat(16, 0, signed=False)


def _input_bytes(c: Circuit, num_features: int) -> list[BitWord]:
    return [
        BitWord([c.add_input() for _ in range(8)], U8) for _ in range(num_features)
    ]


def _compile_byte_table(c: Circuit, byte: BitWord, table, out_fmt) -> BitWord:
    """Shannon mux tree mapping a byte word through a 256-entry table.
    Subranges with a constant value collapse; no sharing across branches."""
    table = np.asarray(table, dtype=np.int64)

    def build(bit, lo, hi):
        chunk = table[lo:hi]
        if (chunk == chunk[0]).all():
            return const_word(c, int(chunk[0]), out_fmt)
        mid = (lo + hi) // 2
        low = build(bit - 1, lo, mid)
        high = build(bit - 1, mid, hi)
        return mux_word(c, byte.bits[bit], high, low)

    return build(7, 0, 256)


def compile_mlp(q: QuantizedMlp, mult: str = "csd", gates: str = "and_xor") -> Circuit:
    """Quantized MLP to circuit: shared pixel-to-activation mapping per
    input byte, one saturating 24-bit MAC chain per neuron (bias first,
    inputs in index order, zero weights skipped), truncating rescale to
    A16F6, ReLU on hidden layers, 10 signed 16-bit output buses."""
    if mult not in ("csd", "array"):
        raise ValueError("mult must be 'csd' or 'array'")
    if gates not in ("and_xor", "and_only"):
        raise ValueError("gates must be 'and_xor' or 'and_only'")
    mul = mul_const_csd if mult == "csd" else mul_const_array

    c = Circuit()
    sizes = q.layer_sizes
    pixels = _input_bytes(c, sizes[0])
    acts = [_compile_byte_table(c, p, PIXEL_TO_A16, A16F6) for p in pixels]
    n_layers = len(q.weights)
    for li in range(n_layers):
        w, b = q.weights[li], q.biases[li]
        nxt = []
        for i in range(w.shape[0]):
            acc = const_word(c, int(b[i]), ACC24F12)
            for j in range(w.shape[1]):
                code = int(w[i, j])
                if code:
                    acc = add_saturating(c, acc, mul(c, acts[j], code))
            v = rescale_24_to_16(c, acc)
            if li < n_layers - 1:
                v = relu(c, v)
            nxt.append(v)
        acts = nxt
    if len(acts) != 10:
        raise ValueError("classifier must have 10 outputs")
    for k, word in enumerate(acts):
        c.add_output_bus(f"class{k}", word.bits)
    c.freeze()
    if gates == "and_only":
        c = decompose_xors(c)
    return c


def compile_forest(f: ForestModel, num_features: int | None = None) -> Circuit:
    """Forest to circuit: per internal node a 10x16-bit mux controlled by
    an 8-bit comparator, per leaf 10 16-bit class-count constants, trees
    summed with unsigned 16-bit saturating adders."""

    def max_feature(node):
        if isinstance(node, TreeLeaf):
            return -1
        return max(node.feature, max_feature(node.left), max_feature(node.right))

    if num_features is None:
        num_features = max(max_feature(t) for t in f.trees) + 1
    c = Circuit()
    pixels = _input_bytes(c, num_features)

    def build(node):
        if isinstance(node, TreeLeaf):
            return [const_word(c, cnt, U16) for cnt in node.counts]
        sel = compare_leq_const(c, pixels[node.feature], node.threshold)
        left = build(node.left)
        right = build(node.right)
        return [mux_word(c, sel, a, b) for a, b in zip(left, right)]

    totals = None
    for t in f.trees:
        words = build(t)
        if totals is None:
            totals = words
        else:
            totals = [
                add_saturating_unsigned(c, a, b) for a, b in zip(totals, words)
            ]
    for k, word in enumerate(totals):
        c.add_output_bus(f"class{k}", word.bits)
    return c.freeze()


def compile_lut(l: LutModel, num_features: int | None = None) -> Circuit:
    """Lookup table to circuit: per entry an equality comparator (AND tree
    over the input bits) and a priority mux chain; the default one-hot
    class when nothing matches."""
    if num_features is None:
        if not l.entries:
            raise ValueError("cannot infer input width of an empty table")
        num_features = len(l.entries[0][0])
    c = Circuit()
    pixels = _input_bytes(c, num_features)
    in_bits = [b for p in pixels for b in p.bits]

    def and_tree(lits):
        while len(lits) > 1:
            lits = [
                c.add_and(lits[i], lits[i + 1]) if i + 1 < len(lits) else lits[i]
                for i in range(0, len(lits), 2)
            ]
        return lits[0] if lits else CONST1

    def onehot(label):
        return [CONST1 if k == label else CONST0 for k in range(10)]

    matches = []
    for x, _ in l.entries:
        xbits = np.unpackbits(np.asarray(x, dtype=np.uint8), bitorder="little")
        if len(xbits) != len(in_bits):
            raise ValueError("entry width mismatch")
        matches.append(
            and_tree([b if v else lit_not(b) for b, v in zip(in_bits, xbits)])
        )

    out = onehot(l.default_class)
    fmt1 = FixedFormat(1, 0, signed=False)
    for (x, y), m in zip(reversed(l.entries), reversed(matches)):
        sel = onehot(y)
        out = [
            mux_word(c, m, BitWord([a], fmt1), BitWord([b], fmt1)).bits[0]
            for a, b in zip(sel, out)
        ]
    for k in range(10):
        c.add_output_bus(f"class{k}", [out[k]])
    return c.freeze()


def compile_model(model, mult: str = "csd", gates: str = "and_xor",
                  num_features: int | None = None) -> Circuit:
    """Dispatch on model type; float MLPs are quantized first."""
    from .models import MlpModel, quantize_mlp

    if isinstance(model, MlpModel):
        model = quantize_mlp(model)
    if isinstance(model, QuantizedMlp):
        return compile_mlp(model, mult=mult, gates=gates)
    if isinstance(model, ForestModel):
        c = compile_forest(model, num_features=num_features)
    elif isinstance(model, LutModel):
        c = compile_lut(model, num_features=num_features)
    else:
        raise TypeError(f"cannot compile {model!r}")
    if gates == "and_only":
        c = decompose_xors(c)
    return c
