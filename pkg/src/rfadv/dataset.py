"""Dataset assembly and the on-disk container format.

A dataset is a class-balanced grid of (modulation, SNR) cells with
deterministic train/test split tags. Files hold a one-line JSON header (all
generation metadata plus per-sample labels/SNR/split/scale) followed by a
little-endian float32 interleaved I/Q payload; the round trip is byte-exact
because samples are quantized to float32 once at build time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .errors import ConfigurationError, CorruptFileError
from .modulation import IQSample, ModulationType, PulseSpec, synth_sample
from .numerics import derive_rng

__all__ = ["GenerationSpec", "Dataset", "build_dataset", "save_dataset", "load_dataset"]

_FMT = "rfadv.dataset"


@dataclass(frozen=True)
class GenerationSpec:
    """Recipe for a synthetic dataset (the header mirrors these fields)."""
    classes: tuple[ModulationType, ...]
    snr_grid_db: tuple[float, ...]
    per_class_per_snr: int
    seed: int
    p: int = 128
    osf: int = 8
    train_frac: float = 0.8
    pulse: PulseSpec = field(default_factory=PulseSpec)

    def __post_init__(self):
        if len(self.classes) == 0:
            raise ConfigurationError("class list is empty")
        if len(set(self.classes)) != len(self.classes):
            raise ConfigurationError("duplicate classes")
        if self.per_class_per_snr < 1:
            raise ConfigurationError("per_class_per_snr must be >= 1")
        if not (0.0 <= self.train_frac <= 1.0):
            raise ConfigurationError(f"train_frac out of [0,1]: {self.train_frac}")


@dataclass
class Dataset:
    spec: GenerationSpec
    samples: list[IQSample]

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def classes(self) -> tuple[ModulationType, ...]:
        return self.spec.classes

    def class_index(self, mod: ModulationType) -> int:
        return self.spec.classes.index(mod)

    def subset(self, split: str | None = None, snr_db: float | None = None) -> list[IQSample]:
        out = self.samples
        if split is not None:
            out = [s for s in out if s.split == split]
        if snr_db is not None:
            out = [s for s in out if s.snr_db == snr_db]
        return out

    def as_arrays(self, split: str | None = None, snr_db: float | None = None):
        """(X complex (n,p), y int (n,)) view of a subset."""
        subset = self.subset(split, snr_db)
        x = np.stack([s.iq for s in subset]) if subset else np.zeros((0, self.spec.p), complex)
        y = np.array([self.class_index(s.label) for s in subset], dtype=np.int64)
        return x, y


def _quantize(iq: np.ndarray) -> np.ndarray:
    """Round to float32 I/Q and come back to complex128 (storage precision)."""
    return iq.astype(np.complex64).astype(np.complex128)


def build_dataset(spec: GenerationSpec) -> Dataset:
    """Synthesize the full (class x SNR) grid, quantized to storage precision.

    Per-sample RNG streams are derived from (seed, class, snr, index) so any
    cell can be regenerated independently. Split tags come from a
    seed-derived shuffle within each cell, keeping the split class-balanced.
    """
    samples: list[IQSample] = []
    for mod in spec.classes:
        for snr in spec.snr_grid_db:
            n = spec.per_class_per_snr
            n_train = int(round(n * spec.train_frac))
            order = derive_rng(spec.seed, "split", mod.value, snr).permutation(n)
            tags = np.empty(n, dtype=object)
            tags[order[:n_train]] = "train"
            tags[order[n_train:]] = "test"
            for i in range(n):
                rng = derive_rng(spec.seed, "sample", mod.value, snr, i)
                s = synth_sample(mod, snr, spec.p, rng, spec.osf, spec.pulse)
                s.iq = _quantize(s.iq)
                s.split = str(tags[i])
                samples.append(s)
    return Dataset(spec=spec, samples=samples)


def save_dataset(path, ds: Dataset) -> None:
    spec = ds.spec
    n = len(ds.samples)
    payload = np.empty((n, 2 * spec.p), dtype="<f4")
    for i, s in enumerate(ds.samples):
        if s.iq.shape != (spec.p,):
            raise ConfigurationError(f"sample {i} has shape {s.iq.shape}, want ({spec.p},)")
        payload[i, 0::2] = s.iq.real
        payload[i, 1::2] = s.iq.imag
    header = {
        "p": spec.p,
        "osf": spec.osf,
        "classes": [m.value for m in spec.classes],
        "snr_grid_db": [_snr_json(v) for v in spec.snr_grid_db],
        "per_class_per_snr": spec.per_class_per_snr,
        "seed": spec.seed,
        "train_frac": spec.train_frac,
        "pulse": {"kind": spec.pulse.kind, "rolloff": spec.pulse.rolloff,
                  "span": spec.pulse.span},
        "count": n,
        "labels": [m.value for m in (s.label for s in ds.samples)],
        "snrs_db": [_snr_json(s.snr_db) for s in ds.samples],
        "splits": [s.split for s in ds.samples],
        "scales": [s.norm_scale for s in ds.samples],
    }
    write_container(path, _FMT, header, payload.tobytes())


def _snr_json(v: float):
    return "inf" if math.isinf(v) else float(v)


def _snr_parse(v) -> float:
    return math.inf if v == "inf" else float(v)


def load_dataset(path) -> Dataset:
    header, payload = read_container(path, _FMT)
    try:
        p = int(header["p"])
        count = int(header["count"])
        classes = tuple(ModulationType(v) for v in header["classes"])
        spec = GenerationSpec(
            classes=classes,
            snr_grid_db=tuple(_snr_parse(v) for v in header["snr_grid_db"]),
            per_class_per_snr=int(header["per_class_per_snr"]),
            seed=int(header["seed"]),
            p=p,
            osf=int(header["osf"]),
            train_frac=float(header["train_frac"]),
            pulse=PulseSpec(**header["pulse"]),
        )
        labels = [ModulationType(v) for v in header["labels"]]
        snrs = [_snr_parse(v) for v in header["snrs_db"]]
        splits = [str(v) for v in header["splits"]]
        scales = [float(v) for v in header["scales"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptFileError(f"{path}: bad header field: {exc}") from exc
    if not (len(labels) == len(snrs) == len(splits) == len(scales) == count):
        raise CorruptFileError(f"{path}: per-sample metadata lengths disagree")
    want = count * 2 * p * 4
    if len(payload) != want:
        raise CorruptFileError(
            f"{path}: payload is {len(payload)} bytes, expected {want}"
        )
    flat = np.frombuffer(payload, dtype="<f4").reshape(count, 2 * p)
    samples = []
    for i in range(count):
        iq = (flat[i, 0::2] + 1j * flat[i, 1::2]).astype(np.complex128)
        samples.append(IQSample(iq=iq, label=labels[i], snr_db=snrs[i],
                                osf=spec.osf, norm_scale=scales[i], split=splits[i]))
    return Dataset(spec=spec, samples=samples)
