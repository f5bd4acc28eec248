"""Rebuild the pinned sweep fixtures in this directory.

Run from the repo root:

    python3 tests/data/golden/regen.py

Only commit regenerated outputs when the sweep contract changes on purpose;
test_golden.py compares against these bytes exactly. The CSV is reproducible
on the pinned dependency set; a different BLAS/numpy build may disagree in
the last float digits.
"""
import json
import math
import os

from rfadv import (ArchitectureSpec, GenerationSpec, TrainConfig,
                   build_dataset, load_sweep_config, new_model, save_dataset,
                   save_model, sweep_from_config, train, write_sweep_csv)
from rfadv.modulation import ModulationType

HERE = os.path.dirname(os.path.abspath(__file__))

CLASSES = (ModulationType.BPSK, ModulationType.QPSK,
           ModulationType.QAM16, ModulationType.GFSK)

CONFIG = {
    "model": "model.bin",
    "dataset": "dataset.bin",
    "substitute": "substitute.bin",
    "split": "test",
    "eval_snr_db": "inf",
    "attacks": ["none", "noch", "channel-inversion", "mmse-targeted",
                "mrpp-targeted", "naive-nontargeted", "mmse-nontargeted",
                "mrpp-nontargeted", "limited-channel", "uap-inputs",
                "uap-limited", "uap-blackbox"],
    "pnr_grid_db": [-5.0, 5.0],
    "snr_db": 10.0,
    "trials": 25,
    "seed": 2026,
    "pnr_reference": "receiver",
    "attack_params": {"uap_count": 12, "uap_channels": 4, "epochs": 2},
    "crafting": {"split": "train", "count": 12},
}


def main():
    ds = build_dataset(GenerationSpec(
        classes=CLASSES, snr_grid_db=(math.inf,), per_class_per_snr=30,
        seed=21))
    save_dataset(os.path.join(HERE, "dataset.bin"), ds)

    def fit(param_seed, train_seed):
        model = new_model(ArchitectureSpec(
            p=128, classes=CLASSES, conv=((8, 5), (4, 3)), dense=(32,),
            param_seed=param_seed))
        train(model, ds, TrainConfig(epochs=12, batch_size=32,
                                     learn_rate=0.2, seed=train_seed))
        return model

    save_model(os.path.join(HERE, "model.bin"), fit(0, 1))
    save_model(os.path.join(HERE, "substitute.bin"), fit(5, 7))

    cfg_path = os.path.join(HERE, "sweep.json")
    with open(cfg_path, "w") as fh:
        json.dump(CONFIG, fh, indent=2)
        fh.write("\n")

    rows = sweep_from_config(load_sweep_config(cfg_path))
    write_sweep_csv(os.path.join(HERE, "golden.csv"), rows)
    print(f"wrote {len(rows)} rows")


if __name__ == "__main__":
    main()
