"""Bit-parallel circuit simulation over a whole training set.

Columns are uint64 words, 64 examples per word.  Passes run in topological
order with reference-counted recycling of intermediate columns; output-bus
columns stay pinned.  The word range may be split into blocks processed
independently (``CFSIM_THREADS``); results are bit-identical regardless of
the partitioning.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .circuit import KIND_AND, KIND_INPUT, Circuit

_MODES = {
    "simple": _kernels.MODE_SIMPLE,
    "composite": _kernels.MODE_COMPOSITE,
    "randomized": _kernels.MODE_RANDOMIZED,
    "noise": _kernels.MODE_NOISE,
}


class Stimulus:
    """Packed input columns for N examples."""

    def __init__(self, words: np.ndarray, num_examples: int):
        assert words.dtype == np.uint64
        self.words = words
        self.num_examples = num_examples

    @property
    def num_inputs(self):
        return self.words.shape[0]

    @property
    def num_words(self):
        return self.words.shape[1]

    def pads(self) -> np.ndarray:
        """Per-word valid-bit masks (zero above the example count)."""
        nw = self.num_words
        pads = np.full(nw, ~np.uint64(0), dtype=np.uint64)
        rem = self.num_examples % 64
        if rem:
            pads[-1] = np.uint64((1 << rem) - 1)
        return pads

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "Stimulus":
        """bits: (num_examples, num_inputs) 0/1 array."""
        bits = np.asarray(bits, dtype=np.uint64)
        n, k = bits.shape
        nw = (n + 63) // 64
        padded = np.zeros((nw * 64, k), dtype=np.uint64)
        padded[:n] = bits
        shifts = np.arange(64, dtype=np.uint64)
        words = (padded.reshape(nw, 64, k) << shifts[None, :, None]).sum(
            axis=1, dtype=np.uint64
        )
        return cls(np.ascontiguousarray(words.T), n)

    @classmethod
    def from_features(cls, features: np.ndarray) -> "Stimulus":
        """Byte features (N, F) to the shared input layout: 8 bits per
        feature, feature-major, least-significant bit first."""
        features = np.asarray(features, dtype=np.uint8)
        n, f = features.shape
        bits = (features[:, :, None] >> np.arange(8, dtype=np.uint8)) & 1
        return cls.from_bits(bits.reshape(n, f * 8))

    def example_bits(self, e: int) -> np.ndarray:
        w, b = divmod(e, 64)
        return ((self.words[:, w] >> np.uint64(b)) & np.uint64(1)).astype(np.uint8)


@dataclass
class PerturbPlan:
    """Perturbation rule for a second pass, derived from pass-1 counts."""

    mode: str
    l: int = 0
    seed: int = 0
    p: float = 0.0
    perturb_inputs: bool | None = None  # None: mode default
    counts: np.ndarray | None = None
    pair_counts: np.ndarray | None = None

    def inputs_included(self) -> bool:
        if self.perturb_inputs is not None:
            return self.perturb_inputs
        # simple/randomized cover primary inputs by default; blanket noise
        # targets gate outputs only
        return self.mode in ("simple", "randomized")


@dataclass
class SimResult:
    counts: np.ndarray
    pair_counts: np.ndarray | None
    outputs: list[tuple[str, np.ndarray]]
    num_examples: int = 0


def _num_threads() -> int:
    try:
        return max(1, int(os.environ.get("CFSIM_THREADS", "1")))
    except ValueError:
        return 1


def _slot_plan(circuit: Circuit, recycle: bool):
    key = "_slot_plan" if recycle else "_slot_plan_flat"
    cached = getattr(circuit, key, None)
    if cached is not None:
        return cached
    circuit.freeze()
    if recycle:
        plan = _kernels.assign_slots(
            circuit.kind, circuit.f0, circuit.f1, circuit.fanout_count
        )
    else:
        n = circuit.num_nodes
        plan = (np.arange(n, dtype=np.int64), n, n)
    setattr(circuit, key, plan)
    return plan


def _dispatch(circuit, stimulus, mode, l, counts, pair_counts, seed, p,
              perturb_inputs, want_pairs, affect_ls, recycle):
    if stimulus.num_inputs != circuit.num_inputs:
        raise ValueError(
            f"stimulus has {stimulus.num_inputs} inputs, "
            f"circuit expects {circuit.num_inputs}"
        )
    circuit.freeze()
    slot, nslots, _peak = _slot_plan(circuit, recycle)
    pads = stimulus.pads()
    nw = stimulus.num_words
    total = stimulus.num_examples
    ones_in = counts if counts is not None else np.zeros(1, dtype=np.int64)
    pairs_in = pair_counts if pair_counts is not None else np.zeros((1, 4), dtype=np.int64)
    affect_ls = np.asarray(affect_ls, dtype=np.int64)

    def run_block(lo, hi):
        n_block = min(total - lo * 64, (hi - lo) * 64)
        return _kernels.run_pass(
            circuit.kind, circuit.f0, circuit.f1, slot, nslots,
            np.ascontiguousarray(stimulus.words[:, lo:hi]), pads[lo:hi],
            n_block, total, lo, mode, l, ones_in, pairs_in,
            np.uint64(seed & (2**64 - 1)), float(p),
            perturb_inputs, want_pairs, affect_ls,
        )

    nthreads = min(_num_threads(), nw)
    if nthreads <= 1:
        parts = [run_block(0, nw)]
    else:
        step = (nw + nthreads - 1) // nthreads
        bounds = [(lo, min(nw, lo + step)) for lo in range(0, nw, step)]
        with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            parts = list(pool.map(lambda b: run_block(*b), bounds))

    buf = np.concatenate([p[0] for p in parts], axis=1) if len(parts) > 1 else parts[0][0]
    ones = sum(p[1] for p in parts) if mode == _kernels.MODE_NORMAL else None
    pairs = (
        sum(p[2] for p in parts)
        if (mode == _kernels.MODE_NORMAL and want_pairs)
        else None
    )
    if mode == _kernels.MODE_AFFECT and len(affect_ls):
        affected = np.concatenate([p[3] for p in parts], axis=1)
    else:
        affected = None

    outputs = []
    for name, lits in circuit.output_buses:
        cols = np.zeros((len(lits), nw), dtype=np.uint64)
        for i, x in enumerate(lits):
            col = buf[slot[x >> 1]]
            cols[i] = (col ^ pads) if x & 1 else col
        outputs.append((name, cols))
    return ones, pairs, affected, outputs


def simulate_and_count(circuit: Circuit, stimulus: Stimulus, want_pairs: bool = False,
                       recycle: bool = True) -> SimResult:
    """Pass 1: exact simulation with per-node ones counts.

    ``want_pairs`` also collects per-gate fanin value-pair counts (as seen
    by the gate, after edge complementation) for composite CFS.
    """
    ones, pairs, _, outputs = _dispatch(
        circuit, stimulus, _kernels.MODE_NORMAL, 0, None, None, 0, 0.0,
        False, want_pairs, (), recycle,
    )
    return SimResult(ones, pairs, outputs, num_examples=stimulus.num_examples)


def simulate_perturbed(circuit: Circuit, stimulus: Stimulus, plan: PerturbPlan,
                       recycle: bool = True) -> list[tuple[str, np.ndarray]]:
    """Pass 2: re-simulate with the plan's perturbation rule applied to
    every node column before its fanouts consume it."""
    if plan.mode == "none":
        return simulate_and_count(circuit, stimulus, recycle=recycle).outputs
    mode = _MODES[plan.mode]
    if plan.mode in ("simple", "randomized") and plan.counts is None:
        raise ValueError(f"{plan.mode} CFS needs pass-1 counts")
    if plan.mode == "composite" and plan.pair_counts is None:
        raise ValueError("composite CFS needs pass-1 pair counts")
    if plan.counts is not None and len(plan.counts) != circuit.num_nodes:
        raise ValueError("plan counts do not match circuit")
    if plan.pair_counts is not None and len(plan.pair_counts) != circuit.num_nodes:
        raise ValueError("plan pair counts do not match circuit")
    _, _, _, outputs = _dispatch(
        circuit, stimulus, mode, int(plan.l), plan.counts, plan.pair_counts,
        plan.seed, plan.p, plan.inputs_included(), False, (), recycle,
    )
    return outputs


def affected_masks(circuit: Circuit, stimulus: Stimulus, counts: np.ndarray,
                   ls, recycle: bool = True) -> dict[int, np.ndarray]:
    """Packed per-threshold masks of examples that see at least one l-rare
    value at some node (inputs and constants included)."""
    ls = [int(v) for v in ls]
    _, _, affected, _ = _dispatch(
        circuit, stimulus, _kernels.MODE_AFFECT, 0, np.asarray(counts, dtype=np.int64),
        None, 0, 0.0, False, False, ls, recycle,
    )
    return {lv: affected[i] for i, lv in enumerate(ls)}


def unaffected_count(circuit: Circuit, stimulus: Stimulus, counts: np.ndarray,
                     l: int) -> int:
    """Number of examples with no l-rare value at any node."""
    mask = affected_masks(circuit, stimulus, counts, [l])[int(l)]
    return stimulus.num_examples - int(np.bitwise_count(mask).sum())


def decode_bus(cols: np.ndarray, num_examples: int, signed: bool = True) -> np.ndarray:
    """Unpack a bus's bit columns (width, nwords) to per-example integers."""
    width, nw = cols.shape
    shifts = np.arange(64, dtype=np.uint64)
    bits = (cols[:, :, None] >> shifts[None, None, :]) & np.uint64(1)
    bits = bits.reshape(width, nw * 64)[:, :num_examples].astype(np.int64)
    weights = 1 << np.arange(width, dtype=np.int64)
    vals = (bits * weights[:, None]).sum(axis=0)
    if signed and width > 1:
        vals -= (bits[-1] << width).astype(np.int64)
    return vals


def argmax_classes(outputs: list[tuple[str, np.ndarray]], num_examples: int) -> np.ndarray:
    """Top-1 class per example over the output bus group, ties broken
    toward the lowest class index.  Width-1 buses decode as one-hot bits,
    wider buses as signed two's complement."""
    values = np.stack([decode_bus(cols, num_examples) for _, cols in outputs], axis=0)
    return values.argmax(axis=0)


def accuracy_of(outputs: list[tuple[str, np.ndarray]], labels) -> float:
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() > 9:
        raise ValueError("labels must be in 0..9")
    pred = argmax_classes(outputs, len(labels))
    return float((pred == labels).mean())


def simulate_naive(circuit: Circuit, input_bits) -> tuple[list[int], dict[str, list[int]]]:
    """Scalar per-example reference simulator (oracle only)."""
    circuit.freeze()
    input_bits = list(input_bits)
    if len(input_bits) != circuit.num_inputs:
        raise ValueError("input width mismatch")
    vals = [0] * circuit.num_nodes
    kind, f0, f1 = circuit._kind, circuit._f0, circuit._f1
    for n in range(circuit.num_nodes):
        k = kind[n]
        if k == KIND_INPUT:
            vals[n] = int(input_bits[f0[n]])
        elif k >= KIND_AND:
            a = vals[f0[n] >> 1] ^ (f0[n] & 1)
            b = vals[f1[n] >> 1] ^ (f1[n] & 1)
            vals[n] = (a & b) if k == KIND_AND else (a ^ b)
    outs = {
        name: [vals[x >> 1] ^ (x & 1) for x in lits]
        for name, lits in circuit.output_buses
    }
    return vals, outs
