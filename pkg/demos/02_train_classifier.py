"""Train a small modulation classifier from scratch and save it.

The model is a pair of 1-d conv layers over the stacked I/Q vector plus one
dense layer, trained with plain SGD. Noise jitter adds a random-SNR
corruption to every batch so the classifier stays robust off the clean
manifold; that matters later when perturbed signals arrive through fading.

Run:  python3 demos/02_train_classifier.py  (writes under demo_out/)
"""
import math
import os

from rfadv import (ArchitectureSpec, GenerationSpec, TrainConfig,
                   build_dataset, load_model, new_model, save_model, train)
from rfadv.modulation import ModulationType

OUT = "demo_out"
CLASSES = (ModulationType.BPSK, ModulationType.QPSK,
           ModulationType.QAM16, ModulationType.GFSK)


def main():
    os.makedirs(OUT, exist_ok=True)
    ds = build_dataset(GenerationSpec(classes=CLASSES, snr_grid_db=(math.inf,),
                                      per_class_per_snr=150, seed=5))
    print(f"dataset: {len(ds)} samples, {len(CLASSES)} classes")

    model = new_model(ArchitectureSpec(p=128, classes=CLASSES,
                                       conv=((16, 5), (8, 3)), dense=(64,),
                                       param_seed=0))
    cfg = TrainConfig(epochs=25, batch_size=32, learn_rate=0.2, lr_decay=0.95,
                      seed=1, noise_jitter_db=(3.0, 12.0), verbose=True)
    metrics = train(model, ds, cfg)
    print(f"train accuracy {metrics['train_accuracy']:.3f}, "
          f"test accuracy {metrics['test_accuracy']:.3f}")

    path = os.path.join(OUT, "demo_model.bin")
    save_model(path, model)
    back = load_model(path)
    x, y = ds.as_arrays("test", math.inf)
    print(f"saved to {path}; reloaded model agrees:",
          bool(abs(back.accuracy(x, y) - model.accuracy(x, y)) == 0.0))


if __name__ == "__main__":
    main()
