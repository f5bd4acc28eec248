"""Craft every targeted attack against one transmission and compare them.

The adversary wants the receiver to decode a SPECIFIC wrong class. Four
strategies, all under the same transmit power budget:

  noch               pick direction ignoring the adversary->receiver channel
  channel-inversion  pre-divide that direction by the taps
  mmse-targeted      closed-form compromise between alignment and power
  mrpp-targeted      conjugate-tap weighting, maximizes received power

Run:  python3 demos/04_targeted_attacks.py
"""
import math

import numpy as np

from rfadv import (ChannelModelParams, NoiseSpec, PowerBudget, pnr_to_budget,
                   sample_channel, targeted_channel_inversion, targeted_mmse,
                   targeted_mrpp, targeted_noch)
from rfadv.numerics import derive_rng

from _shared import CLASSES, demo_dataset, demo_model


def pick_sample(model, x_all, y_all, budget: PowerBudget):
    """First correctly classified sample the blind search can flip with
    room to spare, so the comparison below is about channels, not budget.

    eps_table entries are perturbation AMPLITUDES, so affordable means
    eps <= budget.amplitude, not p_max."""
    for i in range(len(x_all)):
        if model.predict_index(x_all[i][None, :])[0] != y_all[i]:
            continue
        out = targeted_noch(model, x_all[i], int(y_all[i]), budget)
        if out.feasible and np.nanmin(out.eps_table) < 0.6 * budget.amplitude:
            return i, out
    raise RuntimeError("no comfortably flippable sample; raise the budget")


def main():
    ds = demo_dataset()
    model = demo_model(ds)
    x_all, y_all = ds.as_arrays("test", math.inf)

    # transmit power matching the noise floor of a 10 dB SNR receiver (PNR 0)
    sigma2 = NoiseSpec.from_snr_db(10.0).sigma2
    budget = pnr_to_budget(0.0, sigma2, model.spec.p, reference="adversary")
    idx, base = pick_sample(model, x_all, y_all, budget)
    x, y = x_all[idx], int(y_all[idx])
    h = sample_channel(ChannelModelParams(), model.spec.p, derive_rng(11, "chan"))
    print(f"attacking sample {idx}: true class {CLASSES[y].value}, "
          f"budget p_max={budget.p_max:.2f} (amplitude {budget.amplitude:.2f})")

    print(f"\nper-class flip amplitudes from the channel-blind search "
          f"(eps_acc={base.diagnostics['eps_acc']:.4f}):")
    for c, eps in enumerate(base.eps_table):
        mark = " <- chosen target" if c == base.target else ""
        if math.isnan(eps):
            cost = "(true class)"
        elif eps >= budget.p_max - base.diagnostics["eps_acc"]:
            cost = "no flip found"
        else:
            cost = f"{eps:.4f}"
            if eps > budget.amplitude:
                cost += " (over budget)"
        print(f"  {CLASSES[c].value:>6}: {cost}{mark}")

    outcomes = {
        "noch": base,
        "channel-inversion": targeted_channel_inversion(
            budget.amplitude * base.direction, h, budget),
        "mmse-targeted": targeted_mmse(model, x, y, h, budget),
        "mrpp-targeted": targeted_mrpp(model, x, y, h, budget),
    }
    print(f"\n{'attack':>18}  {'|delta|^2':>9}  {'received':>9}  result")
    for name, out in outcomes.items():
        r = x + h.taps * out.delta  # noiseless receive to isolate the attack
        pred = model.predict_index(r[None, :])[0]
        note = "flipped" if pred != y else "held"
        print(f"{name:>18}  {out.transmit_power():9.4f}  "
              f"{out.diagnostics['received_power']:9.4f}  "
              f"{CLASSES[pred].value} ({note})")
    print("\nthe blind direction loses power crossing the fading channel;")
    print("the channel-aware attacks keep their punch at the same budget.")


if __name__ == "__main__":
    main()