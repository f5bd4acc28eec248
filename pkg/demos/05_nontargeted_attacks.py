"""Non-targeted attacks: push the decision anywhere wrong, as hard as possible.

Splits the power budget over a few gradient-ascent epochs on the true-class
loss. The three variants differ in how much channel knowledge they burn:
naive ignores the taps when choosing directions, MMSE shapes a channel-blind
reference through the taps afterwards, MRPP weights every step by conj(h).
Measured over many fresh channels, more channel knowledge = fewer correct
decodes at the same transmit power.

Run:  python3 demos/05_nontargeted_attacks.py
"""
import math

from rfadv import (ChannelModelParams, ChannelRealization, NoiseSpec,
                   nontargeted_mmse, nontargeted_mrpp, nontargeted_naive,
                   pnr_to_budget, receive, sample_channel)
from rfadv.numerics import derive_rng

from _shared import demo_dataset, demo_model

TRIALS = 150
SNR_DB = 10.0


def accuracy_under(model, x_all, y_all, crafter, params, noise):
    hits = 0
    for t in range(TRIALS):
        i = t % len(x_all)
        x, y = x_all[i], int(y_all[i])
        h = sample_channel(params, 128, derive_rng(21, "chan", t))
        delta = None if crafter is None else crafter(x, y, h).delta
        # receiver equalizes its own link; only the adversary's path fades
        r = receive(x, h_tr=ChannelRealization.identity(128),
                    noise=noise, rng=derive_rng(21, "noise", t),
                    delta=delta, h_ar=h)
        hits += int(model.predict_index(r[None, :])[0] == y)
    return hits / TRIALS


def main():
    ds = demo_dataset()
    model = demo_model(ds)
    x_all, y_all = ds.as_arrays("test", math.inf)
    params = ChannelModelParams()
    noise = NoiseSpec.from_snr_db(SNR_DB)
    # transmit power sitting right on the receiver noise floor (PNR 0 dB)
    budget = pnr_to_budget(0.0, noise.sigma2, 128, reference="adversary")

    crafters = {
        "no attack": None,
        "naive-nontargeted": lambda x, y, h: nontargeted_naive(
            model, x, y, h, budget, epochs=4),
        "mmse-nontargeted": lambda x, y, h: nontargeted_mmse(
            model, x, y, h, budget, epochs=4),
        "mrpp-nontargeted": lambda x, y, h: nontargeted_mrpp(
            model, x, y, h, budget, epochs=4),
    }
    print(f"{TRIALS} trials, fresh Rayleigh channels each, SNR {SNR_DB:.0f} dB, "
          f"p_max={budget.p_max:.2f}\n")
    for name, crafter in crafters.items():
        acc = accuracy_under(model, x_all, y_all, crafter, params, noise)
        bar = "#" * int(round(acc * 40))
        print(f"{name:>18}: {acc:5.3f}  {bar}")

    # the budget is always spent exactly, never exceeded
    print(f"\ntransmit power vs p_max={budget.p_max:.2f} across epoch counts:")
    h = sample_channel(params, 128, derive_rng(21, "chan", 0))
    for epochs in (1, 2, 8):
        out = nontargeted_mrpp(model, x_all[0], int(y_all[0]), h, budget,
                               epochs=epochs)
        print(f"  epochs={epochs}: |delta|^2 = {out.transmit_power():.12f}")


if __name__ == "__main__":
    main()
