"""Bits shared by the demo scripts.

Later demos need the same small trained classifier; the first run trains it
and caches it under demo_out/, matching what 02_train_classifier.py writes,
so the scripts can be run in any order.
"""
import math
import os

from rfadv import (ArchitectureSpec, GenerationSpec, TrainConfig,
                   build_dataset, load_model, new_model, save_model, train)
from rfadv.modulation import ModulationType

OUT = "demo_out"
CLASSES = (ModulationType.BPSK, ModulationType.QPSK,
           ModulationType.QAM16, ModulationType.GFSK)
MODEL_PATH = os.path.join(OUT, "demo_model.bin")


def demo_dataset():
    return build_dataset(GenerationSpec(classes=CLASSES, snr_grid_db=(math.inf,),
                                        per_class_per_snr=150, seed=5))


def demo_model(ds):
    if os.path.exists(MODEL_PATH):
        return load_model(MODEL_PATH)
    print("training the shared demo model (cached for the other demos) ...")
    model = new_model(ArchitectureSpec(p=128, classes=CLASSES,
                                       conv=((16, 5), (8, 3)), dense=(64,),
                                       param_seed=0))
    train(model, ds, TrainConfig(epochs=25, batch_size=32, learn_rate=0.2,
                                 lr_decay=0.95, seed=1,
                                 noise_jitter_db=(3.0, 12.0)))
    os.makedirs(OUT, exist_ok=True)
    save_model(MODEL_PATH, model)
    return model
