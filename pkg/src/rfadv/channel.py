"""Flat per-sample wireless channel: path loss, log-normal shadowing,
Rayleigh fading, AWGN.

A realization is a diagonal of p complex taps
    h_i = K * (d0/d)^gamma_pl * psi * ray_i
with one shadowing draw psi per realization and i.i.d. unit-power complex
Gaussian ray taps. Shadowing is drawn in the dB domain by default (sigma in
dB, amplitude factor 10^(dB/20)); a natural-log reading is available behind
`shadow_mode="natural"` since the distribution is quoted ambiguously in the
wild. With `normalize_gain` the realization is rescaled to exactly unit mean
tap power, which removes the deterministic path-loss/shadowing scale and
leaves only the fading pattern.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .container import read_container, write_container
from .errors import ConfigurationError, CorruptFileError

__all__ = ["ChannelModelParams", "ChannelRealization", "NoiseSpec",
           "sample_channel", "apply_channel", "receive",
           "save_realizations", "load_realizations"]


@dataclass(frozen=True)
class ChannelModelParams:
    k_gain: float = 1.0
    d0: float = 1.0
    d: float = 10.0
    gamma_pl: float = 2.7
    shadow_sigma_db: float = 8.0
    shadow_mode: str = "db"       # "db": 10^(N(0,sigma^2)/20); "natural": exp(N(0,sigma^2))
    fading: str = "rayleigh"      # or "none"
    normalize_gain: bool = True

    def __post_init__(self):
        if self.d <= 0 or self.d0 <= 0 or self.k_gain <= 0:
            raise ConfigurationError("k_gain, d0, d must be positive")
        if self.shadow_sigma_db < 0:
            raise ConfigurationError("shadow_sigma_db must be >= 0")
        if self.shadow_mode not in ("db", "natural"):
            raise ConfigurationError(f"unknown shadow_mode {self.shadow_mode!r}")
        if self.fading not in ("rayleigh", "none"):
            raise ConfigurationError(f"unknown fading {self.fading!r}")

    def path_gain(self) -> float:
        """Deterministic amplitude factor K*(d0/d)^gamma_pl."""
        return self.k_gain * (self.d0 / self.d) ** self.gamma_pl


@dataclass
class ChannelRealization:
    taps: np.ndarray  # complex (p,)

    @property
    def p(self) -> int:
        return self.taps.shape[0]

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.taps) ** 2))

    @staticmethod
    def identity(p: int) -> "ChannelRealization":
        return ChannelRealization(taps=np.ones(p, dtype=np.complex128))


def sample_channel(params: ChannelModelParams, p: int,
                   rng: np.random.Generator) -> ChannelRealization:
    if p < 1:
        raise ConfigurationError(f"p must be >= 1, got {p}")
    if params.shadow_sigma_db > 0:
        z = rng.standard_normal()
        if params.shadow_mode == "db":
            psi = 10.0 ** (params.shadow_sigma_db * z / 20.0)
        else:
            psi = math.exp(params.shadow_sigma_db * z)
    else:
        psi = 1.0
    if params.fading == "rayleigh":
        ray = (rng.standard_normal(p) + 1j * rng.standard_normal(p)) / math.sqrt(2.0)
    else:
        ray = np.ones(p, dtype=np.complex128)
    taps = params.path_gain() * psi * ray
    if params.normalize_gain:
        mp = np.mean(np.abs(taps) ** 2)
        if mp <= 0:
            raise ConfigurationError("degenerate channel draw")
        taps = taps / math.sqrt(mp)
    return ChannelRealization(taps=taps)


def apply_channel(h: ChannelRealization, x: np.ndarray) -> np.ndarray:
    """Elementwise tap multiply; the diagonal channel acting on a vector."""
    x = np.asarray(x)
    if x.shape[-1] != h.p:
        raise ConfigurationError(f"length {x.shape[-1]} vs channel p={h.p}")
    return h.taps * x


@dataclass(frozen=True)
class NoiseSpec:
    sigma2: float  # complex noise variance per element

    def __post_init__(self):
        if not (self.sigma2 >= 0):
            raise ConfigurationError(f"sigma2 must be >= 0, got {self.sigma2}")

    @staticmethod
    def from_snr_db(snr_db: float) -> "NoiseSpec":
        return NoiseSpec(sigma2=10.0 ** (-snr_db / 10.0))


def receive(x: np.ndarray, h_tr: ChannelRealization, noise: NoiseSpec,
            rng: np.random.Generator, delta: np.ndarray | None = None,
            h_ar: ChannelRealization | None = None) -> np.ndarray:
    """r = h_tr*x + h_ar*delta + n, the victim's input under (optional) attack."""
    r = apply_channel(h_tr, x)
    if delta is not None:
        if h_ar is None:
            raise ConfigurationError("delta given without an adversary channel")
        r = r + apply_channel(h_ar, delta)
    if noise.sigma2 > 0:
        p = r.shape[-1]
        sd = math.sqrt(noise.sigma2 / 2.0)
        r = r + sd * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
    return r


_FMT = "rfadv.channels"


def save_realizations(path, realizations: list[ChannelRealization]) -> None:
    if not realizations:
        raise ConfigurationError("nothing to save")
    p = realizations[0].p
    if any(r.p != p for r in realizations):
        raise ConfigurationError("realizations have mixed lengths")
    payload = np.empty((len(realizations), 2 * p), dtype="<f4")
    for i, r in enumerate(realizations):
        payload[i, 0::2] = r.taps.real
        payload[i, 1::2] = r.taps.imag
    write_container(path, _FMT, {"p": p, "count": len(realizations)}, payload.tobytes())


def load_realizations(path) -> list[ChannelRealization]:
    header, payload = read_container(path, _FMT)
    try:
        p = int(header["p"])
        count = int(header["count"])
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptFileError(f"{path}: bad header field: {exc}") from exc
    if len(payload) != count * 2 * p * 4:
        raise CorruptFileError(f"{path}: payload length mismatch")
    flat = np.frombuffer(payload, dtype="<f4").reshape(count, 2 * p)
    return [ChannelRealization(taps=(flat[i, 0::2] + 1j * flat[i, 1::2]).astype(np.complex128))
            for i in range(count)]
