"""Over-the-air adversarial attacks on a neural modulation classifier.

The package covers the full loop: synthesize I/Q datasets, train a small
convolutional classifier with exact analytic input gradients, craft
channel-aware adversarial perturbations under a power budget (targeted,
non-targeted, and input-agnostic universal variants), and sweep accuracy
against perturbation-to-noise ratio over Rayleigh fading channels.
"""
from .attacks import (AttackOutcome, MmseConfig, PowerBudget,
                      TargetedSearchConfig, fgm_gradient, line_search_gamma,
                      mmse_solution, nontargeted_mmse, nontargeted_mrpp,
                      nontargeted_naive, solve_mmse, targeted_channel_inversion,
                      targeted_mmse, targeted_mrpp, targeted_noch)
from .channel import (ChannelModelParams, ChannelRealization, NoiseSpec,
                      apply_channel, load_realizations, receive,
                      sample_channel, save_realizations)
from .classifier import (ArchitectureSpec, ClassifierModel, TrainConfig,
                         load_model, new_model, save_model, train)
from .dataset import (Dataset, GenerationSpec, build_dataset, load_dataset,
                      save_dataset)
from .errors import (BracketError, ConfigurationError, CorruptFileError,
                     CsvParseError, DegenerateGradientError, RfadvError,
                     ShapeMismatchError, TrainingDivergedError)
from .harness import (ATTACK_KINDS, AttackParams, SweepRow, evaluate_accuracy,
                      load_sweep_config, make_crafting_set, mean_power_gain,
                      pnr_to_budget, read_sweep_csv, run_sweep,
                      sweep_from_config, write_sweep_csv)
from .modulation import (DIGITAL_MODS, LINEAR_MODS, IQSample, ModulationType,
                         PulseSpec, constellation, matched_symbols,
                         synth_sample)
from .numerics import derive_rng, first_right_singular
from .plot import plot_csv, render_sweep_svg
from .universal import (CraftingSet, UapPerturbation, choose_sign,
                        craft_limited_channel, craft_uap_blackbox,
                        craft_uap_inputs, craft_uap_limited)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "RfadvError", "ConfigurationError", "CorruptFileError",
    "ShapeMismatchError", "TrainingDivergedError", "DegenerateGradientError",
    "BracketError", "CsvParseError",
    # signals and data
    "ModulationType", "DIGITAL_MODS", "LINEAR_MODS", "PulseSpec", "IQSample",
    "constellation", "synth_sample", "matched_symbols",
    "GenerationSpec", "Dataset", "build_dataset", "save_dataset",
    "load_dataset",
    # classifier
    "ArchitectureSpec", "TrainConfig", "ClassifierModel", "new_model",
    "train", "save_model", "load_model",
    # channel
    "ChannelModelParams", "ChannelRealization", "NoiseSpec", "sample_channel",
    "apply_channel", "receive", "save_realizations", "load_realizations",
    # attacks
    "PowerBudget", "TargetedSearchConfig", "MmseConfig", "AttackOutcome",
    "fgm_gradient", "targeted_noch", "targeted_mrpp",
    "targeted_channel_inversion", "targeted_mmse", "mmse_solution",
    "solve_mmse", "line_search_gamma", "nontargeted_naive",
    "nontargeted_mrpp", "nontargeted_mmse",
    # universal
    "CraftingSet", "UapPerturbation", "choose_sign", "craft_limited_channel",
    "craft_uap_inputs", "craft_uap_limited", "craft_uap_blackbox",
    # harness and plots
    "ATTACK_KINDS", "AttackParams", "SweepRow", "pnr_to_budget",
    "mean_power_gain", "evaluate_accuracy", "run_sweep", "write_sweep_csv",
    "read_sweep_csv", "make_crafting_set", "load_sweep_config",
    "sweep_from_config", "render_sweep_svg", "plot_csv",
    # numerics
    "derive_rng", "first_right_singular",
]
