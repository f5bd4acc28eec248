"""Empirically check the channel model against its stated statistics.

Draws many diagonal channel realizations and verifies: Rayleigh tap
magnitudes, uniform phases, log-normal shadowing in dB, the path-loss
power law across distance, and the noise calibration behind SNR settings.

Run:  python3 demos/03_channel_statistics.py
"""
import math

import numpy as np
from scipy import stats

from rfadv import ChannelModelParams, NoiseSpec, receive, sample_channel
from rfadv.numerics import derive_rng

P = 128
DRAWS = 2000


def taps(params, n=DRAWS, tag="c"):
    return np.concatenate([sample_channel(params, P, derive_rng(3, tag, i)).taps
                           for i in range(n)])


def main():
    plain = ChannelModelParams(shadow_sigma_db=0.0, normalize_gain=False, d=1.0)
    t = taps(plain)
    ks = stats.kstest(np.abs(t), stats.rayleigh(scale=1 / math.sqrt(2)).cdf)
    print(f"tap magnitude vs rayleigh: KS p = {ks.pvalue:.3f}")
    ksph = stats.kstest(np.angle(t), stats.uniform(-math.pi, 2 * math.pi).cdf)
    print(f"tap phase vs uniform:      KS p = {ksph.pvalue:.3f}")

    shadowed = ChannelModelParams(shadow_sigma_db=8.0, normalize_gain=False,
                                  d=1.0)
    powers = []
    for i in range(DRAWS):
        h = sample_channel(shadowed, P, derive_rng(4, "s", i))
        powers.append(np.mean(np.abs(h.taps) ** 2))
    db = 10 * np.log10(np.array(powers) / shadowed.path_gain() ** 2)
    # per-draw mean tap power wobbles around the shadowing level, so allow a
    # wider band than the pure log-normal would need
    print(f"shadowing spread: std {db.std():.2f} dB (target near 8)")

    print("\npath loss across distance (no shadowing):")
    for d in (1.0, 2.0, 4.0):
        params = ChannelModelParams(d=d, shadow_sigma_db=0.0,
                                    normalize_gain=False)
        mean_p = np.mean(np.abs(taps(params, 400, f"d{d}")) ** 2)
        print(f"  d={d:3.1f}: mean tap power {mean_p:8.5f} "
              f"(law: {params.path_gain() ** 2:8.5f})")

    x = np.ones(P, dtype=np.complex128)
    h = sample_channel(ChannelModelParams(), P, derive_rng(5, "h"))
    noise = NoiseSpec.from_snr_db(10.0)
    r = np.stack([receive(x, h, noise, derive_rng(5, "n", i))
                  for i in range(DRAWS)])
    measured = float(np.mean(np.abs(r - h.taps * x) ** 2))
    print(f"\n10 dB SNR noise variance: measured {measured:.4f}, "
          f"set {noise.sigma2:.4f}")


if __name__ == "__main__":
    main()
