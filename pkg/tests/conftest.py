"""Shared test helpers: random DAG generation and slow scalar oracles
that mirror the documented semantics independently of the kernels."""

from __future__ import annotations

import numpy as np
import pytest

from cfslogic import Circuit, simulate_naive
from cfslogic.circuit import KIND_AND, KIND_INPUT, KIND_XOR


def random_dag(rng, num_inputs=6, num_gates=40, num_buses=2,
               simplify=True) -> Circuit:
    """A random XAIG with complemented edges and a few output buses."""
    c = Circuit(simplify_same_operand=simplify)
    lits = [c.add_input() for _ in range(num_inputs)]
    for _ in range(num_gates):
        a = int(lits[rng.integers(len(lits))]) ^ int(rng.integers(2))
        b = int(lits[rng.integers(len(lits))]) ^ int(rng.integers(2))
        if rng.random() < 0.4:
            lits.append(c.add_xor(a, b))
        else:
            lits.append(c.add_and(a, b))
    for k in range(num_buses):
        width = int(rng.integers(1, 5))
        bus = [int(lits[rng.integers(len(lits))]) ^ int(rng.integers(2))
               for _ in range(width)]
        c.add_output_bus(f"bus{k}", bus)
    return c.freeze()


def random_bits(rng, num_examples, num_inputs):
    return rng.integers(0, 2, size=(num_examples, num_inputs), dtype=np.uint8)


def naive_values(circuit, bits) -> np.ndarray:
    """(num_examples, num_nodes) matrix of exact node values."""
    return np.array([simulate_naive(circuit, row)[0] for row in bits],
                    dtype=np.int64)


def naive_counts(circuit, bits) -> np.ndarray:
    return naive_values(circuit, bits).sum(axis=0)


def naive_pair_counts(circuit, values) -> np.ndarray:
    """Per-gate fanin pattern tallies in (00, 01, 10, 11) order, as seen by
    the gate after edge complementation."""
    n_nodes = circuit.num_nodes
    pairs = np.zeros((n_nodes, 4), dtype=np.int64)
    for n in range(n_nodes):
        if circuit._kind[n] < KIND_AND:
            continue
        fa, fb = circuit._f0[n], circuit._f1[n]
        va = values[:, fa >> 1] ^ (fa & 1)
        vb = values[:, fb >> 1] ^ (fb & 1)
        idx = va * 2 + vb
        pairs[n] = np.bincount(idx, minlength=4)
    return pairs


def _perturb_simple(v, ones, zeros, l):
    rare1 = ones <= l
    rare0 = zeros <= l
    if rare1 and rare0:
        return 1 - v
    if rare1:
        return 0
    if rare0:
        return 1
    return v


def naive_simple_cfs(circuit, bits, l, counts, perturb_inputs=True):
    """Scalar two-pass simple l-CFS; returns the perturbed value matrix."""
    n_ex = len(bits)
    out = np.zeros((n_ex, circuit.num_nodes), dtype=np.int64)
    for e in range(n_ex):
        vals = [0] * circuit.num_nodes
        for n in range(circuit.num_nodes):
            k = circuit._kind[n]
            if k == KIND_INPUT:
                v = int(bits[e][circuit._f0[n]])
            elif k >= KIND_AND:
                fa, fb = circuit._f0[n], circuit._f1[n]
                a = vals[fa >> 1] ^ (fa & 1)
                b = vals[fb >> 1] ^ (fb & 1)
                v = (a & b) if k == KIND_AND else (a ^ b)
            else:
                v = 0
            if k >= KIND_AND or perturb_inputs:
                v = _perturb_simple(v, counts[n], n_ex - counts[n], l)
            vals[n] = v
        out[e] = vals
    return out


def naive_composite_cfs(circuit, bits, l, pair_counts):
    """Scalar composite l-CFS: flip a gate output whenever its (perturbed)
    fanin pattern was l-rare in pass 1."""
    n_ex = len(bits)
    out = np.zeros((n_ex, circuit.num_nodes), dtype=np.int64)
    for e in range(n_ex):
        vals = [0] * circuit.num_nodes
        for n in range(circuit.num_nodes):
            k = circuit._kind[n]
            if k == KIND_INPUT:
                vals[n] = int(bits[e][circuit._f0[n]])
            elif k >= KIND_AND:
                fa, fb = circuit._f0[n], circuit._f1[n]
                a = vals[fa >> 1] ^ (fa & 1)
                b = vals[fb >> 1] ^ (fb & 1)
                v = (a & b) if k == KIND_AND else (a ^ b)
                if pair_counts[n][a * 2 + b] <= l:
                    v ^= 1
                vals[n] = v
        out[e] = vals
    return out


def naive_affected(values, counts, l):
    """Boolean per-example mask: sees at least one l-rare occurring value."""
    n_ex = len(values)
    ones = counts
    zeros = n_ex - counts
    rare_when_1 = (ones > 0) & (ones <= l)
    rare_when_0 = (zeros > 0) & (zeros <= l)
    return ((values == 1) & rare_when_1).any(axis=1) | (
        (values == 0) & rare_when_0
    ).any(axis=1)


def bus_values(outputs, num_examples):
    """Decode every output bus into an unsigned per-bit matrix
    {name: (width, num_examples)} for bit-exact comparisons."""
    decoded = {}
    for name, cols in outputs:
        width, nw = cols.shape
        bits = (cols[:, :, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)
        decoded[name] = bits.reshape(width, nw * 64)[:, :num_examples].astype(np.uint8)
    return decoded


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
