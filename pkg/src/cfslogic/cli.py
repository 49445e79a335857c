"""Command-line surface wiring datasets, trainers, compilers, and the CFS
engine into reproducible experiments."""

from __future__ import annotations

import argparse
import hashlib
import sys

from . import __version__
from .cfs import cfs_curve, noise_curve, rare_stats, write_cfs_csv, write_noise_csv
from .circuit import read_xaig, write_xaig
from .compilers import compile_model
from .data import corrupt_labels, digits, read_idx, write_idx, Dataset
from .models import load_model, save_model
from .sim import Stimulus, accuracy_of, simulate_and_count
from .train import ForestConfig, MlpConfig, train_forest, train_mlp


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def _provenance(seed=None, **paths):
    prov = {"tool": f"cfslogic-{__version__}"}
    if seed is not None:
        prov["seed"] = seed
    for key, path in paths.items():
        if path:
            prov[key] = f"sha256:{_digest(path)}"
    return prov


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def _load_dataset(args) -> Dataset:
    return read_idx(args.images, args.labels)


def cmd_train(args):
    ds = _load_dataset(args)
    if args.model_type == "mlp":
        cfg = MlpConfig(
            hidden_sizes=tuple(_int_list(args.hidden)),
            epochs=args.epochs,
            learning_rate=args.lr,
            batch_size=args.batch_size,
            seed=args.seed,
        )
        model, info = train_mlp(ds, cfg)
        print(f"train accuracy (float): {info['train_accuracy']:.4f}")
    else:
        cfg = ForestConfig(
            num_trees=args.trees,
            max_depth=args.max_depth,
            min_leaf=args.min_leaf,
            seed=args.seed,
        )
        model = train_forest(ds, cfg)
    save_model(model, args.out)
    print(f"wrote {args.out}")


def cmd_compile(args):
    model = load_model(args.model)
    circuit = compile_model(
        model,
        mult=args.mult,
        gates=args.gates.replace("-", "_"),
        num_features=args.features,
    )
    write_xaig(circuit, args.out)
    s = circuit.stats()
    print(
        f"wrote {args.out}: {s['node_count']} nodes, {s['and_count']} and, "
        f"{s['xor_count']} xor, {s['level_count']} levels"
    )


def _circuit_and_stimulus(args):
    circuit = read_xaig(args.circuit)
    ds = _load_dataset(args)
    stim = Stimulus.from_features(ds.features)
    return circuit, stim, ds.labels


def cmd_eval(args):
    circuit, stim, labels = _circuit_and_stimulus(args)
    res = simulate_and_count(circuit, stim)
    acc = accuracy_of(res.outputs, labels)
    print(f"baseline accuracy: {acc!r}")


def cmd_cfs(args):
    circuit, stim, labels = _circuit_and_stimulus(args)
    curve = cfs_curve(
        circuit, stim, labels, _int_list(args.l), mode=args.mode,
        exclude_inputs=args.exclude_inputs, seed=args.seed,
    )
    prov = _provenance(seed=args.seed, circuit=args.circuit,
                       images=args.images, labels=args.labels)
    prov["mode"] = args.mode
    write_cfs_csv(curve, args.out, prov)
    print(f"wrote {args.out}")


def cmd_noise(args):
    circuit, stim, labels = _circuit_and_stimulus(args)
    curve = noise_curve(
        circuit, stim, labels, _float_list(args.p), trials=args.trials, seed=args.seed,
        perturb_inputs=args.noise_inputs,
    )
    prov = _provenance(seed=args.seed, circuit=args.circuit,
                       images=args.images, labels=args.labels)
    write_noise_csv(curve, args.out, prov)
    print(f"wrote {args.out}")


def cmd_stats(args):
    circuit = read_xaig(args.circuit)
    s = circuit.stats()
    for key in ("node_count", "and_count", "xor_count", "level_count", "input_count"):
        print(f"{key}: {s[key]}")
    print("output_bus_shape:", " ".join(f"{n}[{w}]" for n, w in s["output_bus_shape"]))
    if args.l:
        if not (args.images and args.labels):
            raise SystemExit("--l needs --images/--labels for the tabulation")
        ds = _load_dataset(args)
        stim = Stimulus.from_features(ds.features)
        print("l,rare_nodes,unaffected")
        for l, rare, unaffected in rare_stats(circuit, stim, _int_list(args.l)):
            print(f"{l},{rare},{unaffected}")


def cmd_dataset(args):
    if args.dataset_cmd == "digits":
        ds = digits(args.count)
        write_idx(ds, args.images, args.labels)
        print(f"wrote {ds.num_examples} examples to {args.images}, {args.labels}")
        return
    ds = read_idx(args.images, args.labels)
    out = corrupt_labels(ds, args.mode, args.seed, args.fraction)
    write_idx(out, args.images_out or args.images, args.out)
    print(f"wrote corrupted labels to {args.out}")


def build_parser():
    p = argparse.ArgumentParser(prog="cfslogic")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("train", help="train a built-in model, write model JSON")
    ts = t.add_subparsers(dest="model_type", required=True)
    tm = ts.add_parser("mlp")
    tm.add_argument("--images", required=True)
    tm.add_argument("--labels", required=True)
    tm.add_argument("--hidden", default="32,32", help="hidden layer sizes")
    tm.add_argument("--epochs", type=int, default=100)
    tm.add_argument("--lr", type=float, default=0.1)
    tm.add_argument("--batch-size", type=int, default=32)
    tm.add_argument("--seed", type=int, default=0)
    tm.add_argument("--out", required=True)
    tm.set_defaults(func=cmd_train)
    tf = ts.add_parser("forest")
    tf.add_argument("--images", required=True)
    tf.add_argument("--labels", required=True)
    tf.add_argument("--trees", type=int, default=10)
    tf.add_argument("--max-depth", type=int, default=None)
    tf.add_argument("--min-leaf", type=int, default=1)
    tf.add_argument("--seed", type=int, default=0)
    tf.add_argument("--out", required=True)
    tf.set_defaults(func=cmd_train)

    c = sub.add_parser("compile", help="compile model JSON to a .xaig circuit")
    c.add_argument("--model", required=True)
    c.add_argument("--mult", choices=("csd", "array"), default="csd")
    c.add_argument("--gates", choices=("and-xor", "and-only"), default="and-xor")
    c.add_argument("--features", type=int, default=None,
                   help="force the input feature count (forest/lut)")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compile)

    e = sub.add_parser("eval", help="baseline accuracy of a circuit on a dataset")
    e.add_argument("--circuit", required=True)
    e.add_argument("--images", required=True)
    e.add_argument("--labels", required=True)
    e.set_defaults(func=cmd_eval)

    f = sub.add_parser("cfs", help="CFS curve over a threshold schedule")
    f.add_argument("--circuit", required=True)
    f.add_argument("--images", required=True)
    f.add_argument("--labels", required=True)
    f.add_argument("--l", required=True, help="comma-separated thresholds")
    f.add_argument("--mode", choices=("simple", "composite", "randomized"),
                   default="simple")
    f.add_argument("--exclude-inputs", action="store_true")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_cfs)

    n = sub.add_parser("noise", help="blanket-noise curve")
    n.add_argument("--circuit", required=True)
    n.add_argument("--images", required=True)
    n.add_argument("--labels", required=True)
    n.add_argument("--p", required=True, help="comma-separated probabilities")
    n.add_argument("--trials", type=int, default=1)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--noise-inputs", action="store_true",
                   help="also flip primary input bits")
    n.add_argument("--out", required=True)
    n.set_defaults(func=cmd_noise)

    s = sub.add_parser("stats", help="gate/level counts and rare-pattern tabulation")
    s.add_argument("--circuit", required=True)
    s.add_argument("--l", default=None, help="thresholds for the rare tabulation")
    s.add_argument("--images")
    s.add_argument("--labels")
    s.set_defaults(func=cmd_stats)

    d = sub.add_parser("dataset", help="dataset utilities")
    dsub = d.add_subparsers(dest="dataset_cmd", required=True)
    dd = dsub.add_parser("digits", help="write the bundled 8x8 digits as IDX")
    dd.add_argument("--images", required=True)
    dd.add_argument("--labels", required=True)
    dd.add_argument("--count", type=int, default=None)
    dd.set_defaults(func=cmd_dataset)
    dc = dsub.add_parser("corrupt", help="corrupt labels")
    dc.add_argument("--images", required=True)
    dc.add_argument("--labels", required=True)
    dc.add_argument("--mode", choices=("shuffle", "resample"), required=True)
    dc.add_argument("--fraction", type=float, default=None)
    dc.add_argument("--seed", type=int, default=0)
    dc.add_argument("--out", required=True, help="output label IDX path")
    dc.add_argument("--images-out", default=None,
                    help="also copy the images (default: leave in place)")
    dc.set_defaults(func=cmd_dataset)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 -- every failure becomes a diagnostic
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
