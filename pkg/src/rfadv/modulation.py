"""Baseband I/Q waveform synthesis for eleven modulation types.

Linear digital modulations (BPSK/QPSK/8PSK/QAM16/QAM64/PAM4) map random bits
onto a unit-average-power constellation and pulse-shape at `osf` samples per
symbol. The default pulse is a raised cosine, whose impulse response is
exactly zero at nonzero symbol instants, so at infinite SNR the symbol-instant
samples ARE the constellation points (a root-raised-cosine option exists but a
truncated RRC leaves ~1e-3 residual ISI and loses that exactness).

CPFSK/GFSK are phase-continuous frequency modulations (index 0.5, Gaussian
BT 0.35 for GFSK): constant modulus, no finite constellation.

WBFM/AMSSB/AMDSB are coarse analog stand-ins driven by a low-pass-filtered
Gaussian message; they fill out the class list but carry no fidelity claims.

Every sample is normalized to exactly unit mean power; the applied scale is
kept on the sample so matched-symbol extraction can undo it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ModulationType",
    "DIGITAL_MODS",
    "LINEAR_MODS",
    "PulseSpec",
    "IQSample",
    "constellation",
    "synth_sample",
    "matched_symbols",
]


class ModulationType(enum.Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"
    PSK8 = "8psk"
    QAM16 = "qam16"
    QAM64 = "qam64"
    PAM4 = "pam4"
    CPFSK = "cpfsk"
    GFSK = "gfsk"
    WBFM = "wbfm"
    AMSSB = "am-ssb"
    AMDSB = "am-dsb"


# the eight digitally modulated classes used for accuracy thresholds
DIGITAL_MODS = (
    ModulationType.BPSK, ModulationType.QPSK, ModulationType.PSK8,
    ModulationType.QAM16, ModulationType.QAM64, ModulationType.PAM4,
    ModulationType.CPFSK, ModulationType.GFSK,
)

# subset with a declared finite constellation (symbol-exact at infinite SNR)
LINEAR_MODS = DIGITAL_MODS[:6]

_ANALOG_MODS = (ModulationType.WBFM, ModulationType.AMSSB, ModulationType.AMDSB)


def _qam_points(m_side: int) -> np.ndarray:
    lv = np.arange(-(m_side - 1), m_side, 2, dtype=np.float64)
    pts = (lv[:, None] + 1j * lv[None, :]).ravel()
    return pts / math.sqrt(np.mean(np.abs(pts) ** 2))


_CONSTELLATIONS = {
    ModulationType.BPSK: np.array([1.0 + 0j, -1.0 + 0j]),
    ModulationType.QPSK: np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4))),
    ModulationType.PSK8: np.exp(1j * (np.pi / 4 * np.arange(8))),
    ModulationType.QAM16: _qam_points(4),
    ModulationType.QAM64: _qam_points(8),
    ModulationType.PAM4: np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(5.0) + 0j,
}


def constellation(mod: ModulationType) -> np.ndarray:
    """Unit-average-power constellation for a linear digital modulation."""
    if mod not in _CONSTELLATIONS:
        raise ConfigurationError(f"{mod} has no finite constellation")
    return _CONSTELLATIONS[mod].copy()


@dataclass(frozen=True)
class PulseSpec:
    """Transmit pulse configuration.

    kind "rc" keeps symbol instants exact; "rrc" is the classic square-root
    split but leaves truncation ISI. span is the filter length in symbols.
    """
    kind: str = "rc"
    rolloff: float = 0.35
    span: int = 12

    def __post_init__(self):
        if self.kind not in ("rc", "rrc"):
            raise ConfigurationError(f"unknown pulse kind {self.kind!r}")
        if not (0.0 < self.rolloff < 1.0):
            raise ConfigurationError(f"rolloff must be in (0,1), got {self.rolloff}")
        if self.span < 2 or self.span % 2:
            raise ConfigurationError(f"span must be a positive even int, got {self.span}")


@dataclass
class IQSample:
    """One length-p complex baseband vector with its generation metadata.

    norm_scale is the factor the normalizer multiplied the raw waveform by;
    dividing it back out restores exact symbol values at infinite SNR.
    """
    iq: np.ndarray
    label: ModulationType
    snr_db: float
    osf: int = 8
    norm_scale: float = 1.0
    split: str = "train"

    def power(self) -> float:
        return float(np.mean(np.abs(self.iq) ** 2))


def _rc_taps(osf: int, rolloff: float, span: int) -> np.ndarray:
    """Raised-cosine impulse response, length span*osf + 1, centered.

    Taps at nonzero symbol instants are analytically zero; they are snapped to
    exact 0.0 so symbol recovery is exact rather than 1e-16-close.
    """
    n = span * osf + 1
    t = (np.arange(n) - (n - 1) // 2) / float(osf)
    taps = np.empty(n)
    for i, ti in enumerate(t):
        den = 1.0 - (2.0 * rolloff * ti) ** 2
        if abs(ti) < 1e-12:
            taps[i] = 1.0
        elif abs(den) < 1e-10:
            taps[i] = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * rolloff))
        else:
            taps[i] = np.sinc(ti) * np.cos(np.pi * rolloff * ti) / den
    sym = (np.arange(n) - (n - 1) // 2) % osf == 0
    sym[(n - 1) // 2] = False
    taps[sym] = 0.0
    return taps


def _rrc_taps(osf: int, rolloff: float, span: int) -> np.ndarray:
    n = span * osf + 1
    t = (np.arange(n) - (n - 1) // 2) / float(osf)
    b = rolloff
    taps = np.empty(n)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            taps[i] = 1.0 - b + 4.0 * b / np.pi
        elif abs(abs(4.0 * b * ti) - 1.0) < 1e-9:
            taps[i] = (b / math.sqrt(2.0)) * (
                (1 + 2 / np.pi) * math.sin(np.pi / (4 * b))
                + (1 - 2 / np.pi) * math.cos(np.pi / (4 * b))
            )
        else:
            taps[i] = (
                math.sin(np.pi * ti * (1 - b))
                + 4 * b * ti * math.cos(np.pi * ti * (1 + b))
            ) / (np.pi * ti * (1 - (4 * b * ti) ** 2))
    return taps / taps[(n - 1) // 2]


def _shape(symbols: np.ndarray, p: int, osf: int, pulse: PulseSpec) -> np.ndarray:
    """Pulse-shape symbols onto p samples; index k*osf lands on symbol k."""
    if osf == 1 and pulse.kind == "rc":
        return symbols.astype(np.complex128, copy=True)
    taps = _rc_taps(osf, pulse.rolloff, pulse.span) if pulse.kind == "rc" \
        else _rrc_taps(osf, pulse.rolloff, pulse.span)
    up = np.zeros(p, dtype=np.complex128)
    up[::osf] = symbols
    full = np.convolve(up, taps)
    d = (taps.size - 1) // 2
    return full[d:d + p]


def _lowpass_message(rng: np.random.Generator, p: int, cutoff: float = 0.08) -> np.ndarray:
    """Low-pass-filtered unit-variance Gaussian message for the analog modes."""
    raw = rng.standard_normal(p + 64)
    n = 65
    k = np.arange(n) - (n - 1) // 2
    fir = 2 * cutoff * np.sinc(2 * cutoff * k) * np.hamming(n)
    m = np.convolve(raw, fir, mode="same")[32:32 + p]
    sd = np.std(m)
    return m / sd if sd > 0 else m


def _freq_mod_phase(bits: np.ndarray, p: int, osf: int, smooth: np.ndarray | None) -> np.ndarray:
    """Integrate an NRZ frequency pulse train into a phase trajectory (index 0.5)."""
    nrz = np.repeat(bits.astype(np.float64), osf)
    if smooth is not None:
        nrz = np.convolve(nrz, smooth, mode="same")
    return np.cumsum(np.pi * 0.5 * nrz / osf)


def _gauss_fir(osf: int, bt: float = 0.35) -> np.ndarray:
    n = 4 * osf + 1
    t = (np.arange(n) - (n - 1) // 2) / float(osf)
    sigma = math.sqrt(math.log(2.0)) / (2.0 * np.pi * bt)
    g = np.exp(-t ** 2 / (2.0 * sigma ** 2))
    return g / g.sum()


def synth_sample(mod: ModulationType, snr_db: float, p: int,
                 rng: np.random.Generator, osf: int = 8,
                 pulse: PulseSpec = PulseSpec()) -> IQSample:
    """Synthesize one length-p sample of `mod` at the given SNR.

    AWGN of variance 10^(-snr_db/10) per element is added to the unit-power
    waveform, then the sum is renormalized to exactly unit mean power.
    snr_db = math.inf means noiseless.
    """
    if p % osf != 0:
        raise ConfigurationError(f"p={p} is not a multiple of osf={osf}")
    if p < 8 * osf:
        raise ConfigurationError(f"p={p} holds fewer than 8 symbols at osf={osf}")

    n_sym = p // osf
    if mod in _CONSTELLATIONS:
        pts = _CONSTELLATIONS[mod]
        symbols = pts[rng.integers(0, pts.size, size=n_sym)]
        sig = _shape(symbols, p, osf, pulse)
    elif mod is ModulationType.CPFSK:
        bits = rng.integers(0, 2, size=n_sym) * 2 - 1
        sig = np.exp(1j * _freq_mod_phase(bits, p, osf, None))
    elif mod is ModulationType.GFSK:
        bits = rng.integers(0, 2, size=n_sym) * 2 - 1
        sig = np.exp(1j * _freq_mod_phase(bits, p, osf, _gauss_fir(osf)))
    elif mod is ModulationType.WBFM:
        m = _lowpass_message(rng, p)
        sig = np.exp(1j * 2.0 * np.pi * 0.1 * np.cumsum(m))
    elif mod is ModulationType.AMSSB:
        m = _lowpass_message(rng, p)
        spec = np.fft.fft(m)
        spec[p // 2 + 1:] = 0.0  # keep the upper sideband only
        sig = np.fft.ifft(spec)
    elif mod is ModulationType.AMDSB:
        m = _lowpass_message(rng, p)
        sig = (1.0 + 0.5 * m).astype(np.complex128)
    else:  # pragma: no cover
        raise ConfigurationError(f"unhandled modulation {mod}")

    power = float(np.mean(np.abs(sig) ** 2))
    if power <= 0:
        raise ConfigurationError(f"degenerate waveform for {mod}")
    c1 = 1.0 / math.sqrt(power)
    if c1 != 1.0:
        sig = sig * c1

    if math.isinf(snr_db):
        noisy = sig
    else:
        sigma2 = 10.0 ** (-snr_db / 10.0)
        noise = math.sqrt(sigma2 / 2.0) * (
            rng.standard_normal(p) + 1j * rng.standard_normal(p)
        )
        noisy = sig + noise

    c2 = 1.0 / math.sqrt(float(np.mean(np.abs(noisy) ** 2)))
    out = noisy * c2 if c2 != 1.0 else noisy.copy()
    # norm_scale is the total factor between raw symbols and stored samples
    return IQSample(iq=out, label=mod, snr_db=snr_db, osf=osf,
                    norm_scale=float(c1 * c2))


def matched_symbols(sample: IQSample) -> np.ndarray:
    """Recover the symbol-instant values with the normalization undone.

    Exact at infinite SNR with the default rc pulse; at finite SNR the values
    are symbol + filtered noise.
    """
    return sample.iq[::sample.osf] / sample.norm_scale
