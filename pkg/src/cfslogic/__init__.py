"""cfslogic: compile ML models to logic circuits and probe them for
overfitting with counterfactual simulation."""

__version__ = "0.1.0"

from .circuit import (
    CONST0,
    CONST1,
    Circuit,
    CircuitError,
    XaigParseError,
    decompose_xors,
    lit,
    lit_comp,
    lit_node,
    lit_not,
    read_xaig,
    write_xaig,
)
from .wordarith import (
    A16F6,
    ACC24F12,
    W8F6,
    BitWord,
    CsdDigit,
    FixedFormat,
    add_saturating,
    add_saturating_unsigned,
    add_words,
    compare_leq_const,
    const_word,
    csd_digits,
    mul_const_array,
    mul_const_csd,
    mux_word,
    relu,
    rescale_24_to_16,
    sub_saturating,
)
from .models import (
    ForestModel,
    LutModel,
    MlpModel,
    QuantizedMlp,
    TreeLeaf,
    TreeSplit,
    load_model,
    model_from_json,
    model_to_json,
    quantize_mlp,
    reference_eval_forest,
    reference_eval_quantized_mlp,
    rescale_mlp_weights,
    save_model,
)
from .compilers import compile_forest, compile_lut, compile_mlp, compile_model
from .sim import (
    PerturbPlan,
    SimResult,
    Stimulus,
    accuracy_of,
    affected_masks,
    decode_bus,
    simulate_and_count,
    simulate_naive,
    simulate_perturbed,
    unaffected_count,
)
from .cfs import (
    CfsCurve,
    NoiseCurve,
    cfs_accuracy,
    cfs_curve,
    noise_curve,
    rare_stats,
    write_cfs_csv,
    write_noise_csv,
)
from .data import Dataset, corrupt_labels, digits, read_idx, synth_blobs, write_idx
from .train import (
    ForestConfig,
    MlpConfig,
    TrainingDiverged,
    forest_node_count,
    train_forest,
    train_mlp,
)
