"""End-to-end MLP pipeline: train, quantize, compile, probe.

Walks the full toolchain on a small dense ReLU network: SGD training on
the bundled digits, weight rescaling into the quantizer's [-2, 2) clamp,
W8F6 quantization, circuit compilation (CSD multipliers, And/Xor gates),
then a simple-CFS sweep and a blanket-noise sweep over the same circuit.

Run:  python3 demos/mlp_pipeline.py          (about a minute)
"""

from cfslogic import (
    MlpConfig,
    Stimulus,
    accuracy_of,
    cfs_curve,
    compile_mlp,
    digits,
    noise_curve,
    quantize_mlp,
    rescale_mlp_weights,
    simulate_and_count,
    train_mlp,
)


def main():
    ds = digits(500)
    model, info = train_mlp(ds, MlpConfig(hidden_sizes=(16,), epochs=60, seed=0))
    print(f"float train accuracy: {info['train_accuracy']:.3f}")

    quantized = quantize_mlp(rescale_mlp_weights(model))
    circuit = compile_mlp(quantized, mult="csd", gates="and_xor")
    stats = circuit.stats()
    print(f"circuit: {stats['and_count']} and, {stats['xor_count']} xor, "
          f"{stats['level_count']} levels")

    stim = Stimulus.from_features(ds.features)
    baseline = accuracy_of(simulate_and_count(circuit, stim).outputs, ds.labels)
    print(f"compiled baseline accuracy: {baseline:.3f}")

    print("\nsimple CFS sweep:")
    curve = cfs_curve(circuit, stim, ds.labels, [1, 4, 16, 64])
    for row in curve.rows:
        print(f"  l={row.l:3d}  accuracy={row.accuracy:.3f}  "
              f"unaffected={row.unaffected}  perturbed={row.perturbed_node_count}")

    print("\nblanket noise sweep (5 trials each):")
    noise = noise_curve(circuit, stim, ds.labels, [2**-20, 2**-10, 2**-5],
                        trials=5, seed=0)
    for row in noise.rows:
        print(f"  p=2^{row.p.hex().split('p')[1]:>4s}  "
              f"mean={row.mean_accuracy:.3f}  stddev={row.stddev:.3f}")


if __name__ == "__main__":
    main()
