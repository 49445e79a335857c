"""Two-pass counterfactual simulation and blanket-noise studies.

One counting pass per (circuit, stimulus) feeds any number of perturbed
passes across a threshold or probability schedule; results come back as
curve objects and can be emitted as CSV.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import KIND_AND, Circuit
from .sim import (
    PerturbPlan,
    SimResult,
    Stimulus,
    accuracy_of,
    affected_masks,
    simulate_and_count,
    simulate_perturbed,
)


@dataclass
class CfsRow:
    l: int
    accuracy: float
    unaffected: int
    perturbed_node_count: int


@dataclass
class CfsCurve:
    mode: str
    rows: list[CfsRow]


@dataclass
class NoiseRow:
    p: float
    mean_accuracy: float
    stddev: float
    trials: int


@dataclass
class NoiseCurve:
    rows: list[NoiseRow]


def perturbed_node_count(counts: np.ndarray, num_examples: int, l: int,
                         gate_mask: np.ndarray | None = None) -> int:
    """Nodes with at least one occurring value of count <= l."""
    counts = np.asarray(counts)
    zeros = num_examples - counts
    hit = ((counts > 0) & (counts <= l)) | ((zeros > 0) & (zeros <= l))
    if gate_mask is not None:
        hit &= gate_mask
    return int(hit.sum())


def _needs_pairs(mode):
    return mode == "composite"


def cfs_accuracy(circuit: Circuit, stimulus: Stimulus, labels, l: int,
                 mode: str = "simple", exclude_inputs: bool = False, seed: int = 0,
                 _pass1: SimResult | None = None,
                 with_unaffected: bool = True):
    """Two-pass l-CFS training accuracy.

    Returns (accuracy, unaffected_example_count, perturbed_node_count).
    ``_pass1`` lets a schedule reuse the counting pass.  With
    ``with_unaffected=False`` the (separately priced) unaffected tally is
    skipped and reported as -1.
    """
    if mode not in ("simple", "composite", "randomized"):
        raise ValueError(f"unknown CFS mode {mode!r}")
    res = _pass1
    if res is None or (_needs_pairs(mode) and res.pair_counts is None):
        res = simulate_and_count(circuit, stimulus, want_pairs=_needs_pairs(mode))
    plan = PerturbPlan(
        mode=mode, l=int(l), seed=seed,
        perturb_inputs=False if exclude_inputs else None,
        counts=res.counts, pair_counts=res.pair_counts,
    )
    outputs = simulate_perturbed(circuit, stimulus, plan)
    acc = accuracy_of(outputs, labels)
    if with_unaffected:
        mask = affected_masks(circuit, stimulus, res.counts, [int(l)])[int(l)]
        unaffected = stimulus.num_examples - int(np.bitwise_count(mask).sum())
    else:
        unaffected = -1
    gate_mask = circuit.kind >= KIND_AND if (exclude_inputs or mode == "composite") else None
    pcount = perturbed_node_count(res.counts, stimulus.num_examples, l, gate_mask)
    return acc, unaffected, pcount


def cfs_curve(circuit: Circuit, stimulus: Stimulus, labels, l_schedule,
              mode: str = "simple", exclude_inputs: bool = False, seed: int = 0,
              with_unaffected: bool = True) -> CfsCurve:
    """One row per threshold; the counting pass is computed once and
    reused across the whole schedule."""
    ls = [int(v) for v in l_schedule]
    if not ls or sorted(ls) != ls:
        raise ValueError("schedule must be nonempty ascending")
    res = simulate_and_count(circuit, stimulus, want_pairs=_needs_pairs(mode))
    if with_unaffected:
        masks = affected_masks(circuit, stimulus, res.counts, ls)
    rows = []
    for l in ls:
        acc, _, pcount = cfs_accuracy(
            circuit, stimulus, labels, l, mode=mode, exclude_inputs=exclude_inputs,
            seed=seed, _pass1=res, with_unaffected=False,
        )
        if with_unaffected:
            unaffected = stimulus.num_examples - int(np.bitwise_count(masks[l]).sum())
        else:
            unaffected = -1
        rows.append(CfsRow(l, acc, unaffected, pcount))
    return CfsCurve(mode, rows)


def noise_curve(circuit: Circuit, stimulus: Stimulus, labels, p_schedule,
                trials: int = 1, seed: int = 0,
                perturb_inputs: bool = False) -> NoiseCurve:
    """Mean/stddev accuracy over seeded blanket-noise trials per p."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rows = []
    for p in p_schedule:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be a probability")
        accs = []
        for t in range(trials):
            plan = PerturbPlan(
                mode="noise", p=p, seed=(seed * 0x9E3779B9 + t) & 0xFFFFFFFFFFFFFFFF,
                perturb_inputs=True if perturb_inputs else None,
            )
            outputs = simulate_perturbed(circuit, stimulus, plan)
            accs.append(accuracy_of(outputs, labels))
        accs = np.asarray(accs)
        rows.append(NoiseRow(p, float(accs.mean()), float(accs.std()), trials))
    return NoiseCurve(rows)


def rare_stats(circuit: Circuit, stimulus: Stimulus, l_schedule,
               counts: np.ndarray | None = None) -> list[tuple[int, int, int]]:
    """Per-threshold (l, rare_node_count, unaffected_examples) tabulation."""
    ls = [int(v) for v in l_schedule]
    if counts is None:
        counts = simulate_and_count(circuit, stimulus).counts
    masks = affected_masks(circuit, stimulus, counts, ls)
    out = []
    for l in ls:
        unaffected = stimulus.num_examples - int(np.bitwise_count(masks[l]).sum())
        out.append((l, perturbed_node_count(counts, stimulus.num_examples, l), unaffected))
    return out


def _write_provenance(f, provenance):
    if provenance:
        f.write("# " + " ".join(f"{k}={v}" for k, v in provenance.items()) + "\n")


def write_cfs_csv(curve: CfsCurve, sink, provenance: dict | None = None):
    close = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
    f = open(sink, "w") if close else sink
    try:
        _write_provenance(f, provenance)
        f.write("l,accuracy,unaffected,perturbed_nodes\n")
        for r in curve.rows:
            f.write(f"{r.l},{r.accuracy!r},{r.unaffected},{r.perturbed_node_count}\n")
    finally:
        if close:
            f.close()


def write_noise_csv(curve: NoiseCurve, sink, provenance: dict | None = None):
    close = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
    f = open(sink, "w") if close else sink
    try:
        _write_provenance(f, provenance)
        f.write("p,mean_accuracy,stddev,trials\n")
        for r in curve.rows:
            f.write(f"{r.p!r},{r.mean_accuracy!r},{r.stddev!r},{r.trials}\n")
    finally:
        if close:
            f.close()
