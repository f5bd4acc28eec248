"""From-scratch convolutional modulation classifier with analytic gradients.

Complex length-p inputs are viewed as two real channels (I and Q). The
default stack is conv(16,w5)-ReLU-conv(8,w3)-ReLU-dense(64)-ReLU-dense(C)
with softmax/cross-entropy. Everything is plain numpy in float64: no autodiff
framework, so the input gradient is exact by construction and cheap to verify
against finite differences.

Weights are quantized to float32 values at init and after every SGD step, so
the float32 file format round-trips bit-exactly and a reloaded model computes
identical outputs. Convolutions run channels-last via matmul on strided
windows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .errors import (ConfigurationError, CorruptFileError, ShapeMismatchError,
                     TrainingDivergedError)
from .modulation import ModulationType
from .numerics import derive_rng

__all__ = ["ArchitectureSpec", "TrainConfig", "ClassifierModel",
           "new_model", "train", "save_model", "load_model"]


@dataclass(frozen=True)
class ArchitectureSpec:
    p: int
    classes: tuple[ModulationType, ...]
    conv: tuple[tuple[int, int], ...] = ((16, 5), (8, 3))
    dense: tuple[int, ...] = (64,)
    param_seed: int = 0

    def __post_init__(self):
        if self.p < 1 or len(self.classes) < 2:
            raise ConfigurationError("need p >= 1 and at least 2 classes")
        if len(self.conv) < 1:
            raise ConfigurationError("need at least one conv layer")
        length = self.p
        for filters, width in self.conv:
            if filters < 1 or width < 1 or width > length:
                raise ConfigurationError(f"conv ({filters},{width}) does not fit length {length}")
            length = length - width + 1

    @property
    def n_classes(self) -> int:
        return len(self.classes)


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    learn_rate: float = 0.2
    lr_decay: float = 1.0          # per-epoch multiplicative decay
    seed: int = 0
    # additive-noise jitter: per training sample, extra AWGN at an SNR drawn
    # uniformly from this dB range. Hardens the net against small power
    # mismatches between normalized training data and raw received signals.
    noise_jitter_db: tuple[float, float] | None = (6.0, 30.0)
    verbose: bool = False


def _f32(a: np.ndarray) -> np.ndarray:
    """Snap to float32-representable values, kept as float64 for the math."""
    return a.astype("<f4").astype(np.float64)


@dataclass
class ClassifierModel:
    spec: ArchitectureSpec
    conv_w: list = field(default_factory=list)   # each (Co, Ci, k)
    conv_b: list = field(default_factory=list)   # each (Co,)
    dense_w: list = field(default_factory=list)  # each (n_in, n_out)
    dense_b: list = field(default_factory=list)  # each (n_out,)

    # -- forward ----------------------------------------------------------

    def _to_channels(self, x: np.ndarray) -> np.ndarray:
        """complex (B,p) -> float64 (B,p,2) channels-last."""
        x = np.asarray(x)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.spec.p:
            raise ShapeMismatchError(
                f"input shape {x.shape} incompatible with p={self.spec.p}")
        out = np.empty(x.shape + (2,), dtype=np.float64)
        out[..., 0] = x.real
        out[..., 1] = x.imag
        return out

    def _forward_cached(self, x: np.ndarray):
        """Returns (logits, cache) for backprop. x complex (B,p) or (p,)."""
        a = self._to_channels(x)
        cache = {"conv_in": [], "conv_pre": []}
        for w, b in zip(self.conv_w, self.conv_b):
            cache["conv_in"].append(a)
            z = _conv_forward(a, w, b)
            cache["conv_pre"].append(z)
            a = np.maximum(z, 0.0)
        bsz = a.shape[0]
        a = a.reshape(bsz, -1)
        cache["dense_in"] = []
        cache["dense_pre"] = []
        n_dense = len(self.dense_w)
        for i, (w, b) in enumerate(zip(self.dense_w, self.dense_b)):
            cache["dense_in"].append(a)
            z = a @ w + b
            cache["dense_pre"].append(z)
            a = z if i == n_dense - 1 else np.maximum(z, 0.0)
        return a, cache

    def logits(self, x: np.ndarray) -> np.ndarray:
        out, _ = self._forward_cached(x)
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Softmax class probabilities, shape (C,) for a single input."""
        single = np.asarray(x).ndim == 1
        z = self.logits(x)
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        probs = e / e.sum(axis=1, keepdims=True)
        return probs[0] if single else probs

    def predict_index(self, x: np.ndarray):
        z = self.logits(x)
        idx = np.argmax(z, axis=1)  # ties resolve to the lowest class index
        return int(idx[0]) if np.asarray(x).ndim == 1 else idx

    def predict(self, x: np.ndarray) -> ModulationType:
        return self.spec.classes[self.predict_index(np.asarray(x))]

    # -- loss and gradients -------------------------------------------------

    def loss(self, x: np.ndarray, y) -> float | np.ndarray:
        """Cross-entropy of each row against integer label(s) y."""
        single = np.asarray(x).ndim == 1
        z = self.logits(x)
        y = np.atleast_1d(np.asarray(y, dtype=np.int64))
        ls = _logsumexp(z) - z[np.arange(z.shape[0]), y]
        return float(ls[0]) if single else ls

    def input_gradient(self, x: np.ndarray, y) -> np.ndarray:
        """d(cross-entropy)/d(input) as real length-2p vectors [dI..., dQ...].

        For batches, each row's gradient is of that row's own loss.
        """
        single = np.asarray(x).ndim == 1
        z, cache = self._forward_cached(x)
        y = np.atleast_1d(np.asarray(y, dtype=np.int64))
        if y.shape[0] != z.shape[0]:
            raise ShapeMismatchError(f"{y.shape[0]} labels for {z.shape[0]} inputs")
        if np.any(y < 0) or np.any(y >= self.spec.n_classes):
            raise ShapeMismatchError("label out of range")
        dz = _softmax(z)
        dz[np.arange(z.shape[0]), y] -= 1.0
        grads = self._backward(dz, cache, want_input=True, want_params=False)
        din = grads["din"]  # (B, p, 2)
        out = np.concatenate([din[..., 0], din[..., 1]], axis=-1)
        return out[0] if single else out

    def _backward(self, dz: np.ndarray, cache, want_input: bool, want_params: bool):
        grads = {"conv_w": [], "conv_b": [], "dense_w": [], "dense_b": []}
        da = dz
        for i in range(len(self.dense_w) - 1, -1, -1):
            if i != len(self.dense_w) - 1:
                da = da * (cache["dense_pre"][i] > 0)
            a_in = cache["dense_in"][i]
            if want_params:
                grads["dense_w"].insert(0, a_in.T @ da)
                grads["dense_b"].insert(0, da.sum(axis=0))
            da = da @ self.dense_w[i].T
        last_conv = cache["conv_pre"][-1]
        da = da.reshape(last_conv.shape)
        for i in range(len(self.conv_w) - 1, -1, -1):
            da = da * (cache["conv_pre"][i] > 0)
            a_in = cache["conv_in"][i]
            if want_params:
                dw, db = _conv_param_grads(a_in, da, self.conv_w[i])
                grads["conv_w"].insert(0, dw)
                grads["conv_b"].insert(0, db)
            if i > 0 or want_input:
                da = _conv_input_grad(da, self.conv_w[i])
        if want_input:
            grads["din"] = da
        return grads

    # -- training -----------------------------------------------------------

    def sgd_step(self, x: np.ndarray, y: np.ndarray, lr: float) -> float:
        """One mini-batch SGD step on mean cross-entropy; returns the loss."""
        z, cache = self._forward_cached(x)
        n = z.shape[0]
        probs = _softmax(z)
        ls = float(np.mean(_logsumexp(z) - z[np.arange(n), y]))
        dz = (probs - _onehot(y, self.spec.n_classes)) / n
        g = self._backward(dz, cache, want_input=False, want_params=True)
        for w, dw in zip(self.conv_w, g["conv_w"]):
            w[...] = _f32(w - lr * dw)
        for b, db in zip(self.conv_b, g["conv_b"]):
            b[...] = _f32(b - lr * db)
        for w, dw in zip(self.dense_w, g["dense_w"]):
            w[...] = _f32(w - lr * dw)
        for b, db in zip(self.dense_b, g["dense_b"]):
            b[...] = _f32(b - lr * db)
        return ls

    def accuracy(self, x: np.ndarray, y: np.ndarray, batch: int = 512) -> float:
        hits = 0
        for i in range(0, len(x), batch):
            hits += int(np.sum(self.predict_index(x[i:i + batch]) == y[i:i + batch]))
        return hits / len(x) if len(x) else 0.0


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _logsumexp(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1)
    return m + np.log(np.exp(z - m[:, None]).sum(axis=1))


def _onehot(y: np.ndarray, c: int) -> np.ndarray:
    out = np.zeros((y.shape[0], c))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def _conv_forward(a: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a (B,L,Ci), w (Co,Ci,k) -> (B,L-k+1,Co), valid, stride 1."""
    co, ci, k = w.shape
    win = np.lib.stride_tricks.sliding_window_view(a, k, axis=1)  # (B,L',Ci,k)
    bsz, lp = win.shape[0], win.shape[1]
    flat = win.reshape(bsz * lp, ci * k)
    wmat = w.transpose(1, 2, 0).reshape(ci * k, co)
    return (flat @ wmat).reshape(bsz, lp, co) + b


def _conv_param_grads(a_in: np.ndarray, dz: np.ndarray, w: np.ndarray):
    co, ci, k = w.shape
    win = np.lib.stride_tricks.sliding_window_view(a_in, k, axis=1)
    bsz, lp = dz.shape[0], dz.shape[1]
    flat = win.reshape(bsz * lp, ci * k)
    dwmat = flat.T @ dz.reshape(bsz * lp, co)          # (Ci*k, Co)
    dw = dwmat.reshape(ci, k, co).transpose(2, 0, 1)
    return dw, dz.sum(axis=(0, 1))


def _conv_input_grad(dz: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Full correlation of dz with the kernel, summed over output channels."""
    co, ci, k = w.shape
    pad = np.pad(dz, ((0, 0), (k - 1, k - 1), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(pad, k, axis=1)  # (B,L,Co,k)
    bsz, l = win.shape[0], win.shape[1]
    flat = win.reshape(bsz * l, co * k)
    wrev = w[:, :, ::-1].transpose(0, 2, 1).reshape(co * k, ci)
    return (flat @ wrev).reshape(bsz, l, ci)


def new_model(spec: ArchitectureSpec) -> ClassifierModel:
    """Fresh model with fan-in-scaled uniform weights from spec.param_seed."""
    rng = derive_rng(spec.param_seed, "init")
    model = ClassifierModel(spec=spec)
    ci = 2
    for co, k in spec.conv:
        bound = 1.0 / math.sqrt(ci * k)
        model.conv_w.append(_f32(rng.uniform(-bound, bound, size=(co, ci, k))))
        model.conv_b.append(np.zeros(co))
        ci = co
    length = spec.p
    for _, k in spec.conv:
        length = length - k + 1
    n_in = ci * length
    for n_out in tuple(spec.dense) + (spec.n_classes,):
        bound = 1.0 / math.sqrt(n_in)
        model.dense_w.append(_f32(rng.uniform(-bound, bound, size=(n_in, n_out))))
        model.dense_b.append(np.zeros(n_out))
        n_in = n_out
    return model


def train(model: ClassifierModel, dataset, config: TrainConfig) -> dict:
    """Mini-batch SGD on the dataset's train split; returns metrics.

    Raises TrainingDivergedError the moment a batch loss is not finite.
    """
    if tuple(dataset.classes) != tuple(model.spec.classes):
        raise ShapeMismatchError(
            f"dataset classes {[m.value for m in dataset.classes]} != model classes "
            f"{[m.value for m in model.spec.classes]}")
    x_tr, y_tr = dataset.as_arrays(split="train")
    x_te, y_te = dataset.as_arrays(split="test")
    if len(x_tr) == 0:
        raise ConfigurationError("train split is empty")
    losses = []
    for epoch in range(config.epochs):
        order = derive_rng(config.seed, "shuffle", epoch).permutation(len(x_tr))
        aug_rng = derive_rng(config.seed, "augment", epoch)
        lr = config.learn_rate * config.lr_decay ** epoch
        epoch_loss = 0.0
        nb = 0
        for i in range(0, len(order), config.batch_size):
            idx = order[i:i + config.batch_size]
            xb = x_tr[idx]
            if config.noise_jitter_db is not None:
                lo, hi = config.noise_jitter_db
                snr = aug_rng.uniform(lo, hi, size=(len(idx), 1))
                sd = np.sqrt(10.0 ** (-snr / 10.0) / 2.0)
                xb = xb + sd * (aug_rng.standard_normal(xb.shape)
                                + 1j * aug_rng.standard_normal(xb.shape))
            ls = model.sgd_step(xb, y_tr[idx], lr)
            if not math.isfinite(ls):
                raise TrainingDivergedError(
                    f"loss={ls} at epoch {epoch} step {nb}; lower the learn rate")
            epoch_loss += ls
            nb += 1
        losses.append(epoch_loss / max(nb, 1))
        if config.verbose:
            print(f"epoch {epoch + 1:3d}/{config.epochs}  loss {losses[-1]:.4f}")
    metrics = {
        "epochs": config.epochs,
        "final_loss": losses[-1] if losses else None,
        "loss_curve": losses,
        "train_accuracy": model.accuracy(x_tr, y_tr),
        "test_accuracy": model.accuracy(x_te, y_te) if len(x_te) else None,
    }
    return metrics


_FMT = "rfadv.model"


def save_model(path, model: ClassifierModel) -> None:
    spec = model.spec
    arrays = []
    names = []
    for i, (w, b) in enumerate(zip(model.conv_w, model.conv_b)):
        arrays += [w, b]
        names += [f"conv{i}.w", f"conv{i}.b"]
    for i, (w, b) in enumerate(zip(model.dense_w, model.dense_b)):
        arrays += [w, b]
        names += [f"dense{i}.w", f"dense{i}.b"]
    header = {
        "p": spec.p,
        "classes": [m.value for m in spec.classes],
        "conv": [list(c) for c in spec.conv],
        "dense": list(spec.dense),
        "param_seed": spec.param_seed,
        "arrays": [{"name": n, "shape": list(a.shape)} for n, a in zip(names, arrays)],
    }
    payload = b"".join(a.astype("<f4").tobytes() for a in arrays)
    write_container(path, _FMT, header, payload)


def load_model(path) -> ClassifierModel:
    header, payload = read_container(path, _FMT)
    try:
        spec = ArchitectureSpec(
            p=int(header["p"]),
            classes=tuple(ModulationType(v) for v in header["classes"]),
            conv=tuple((int(a), int(b)) for a, b in header["conv"]),
            dense=tuple(int(v) for v in header["dense"]),
            param_seed=int(header["param_seed"]),
        )
        listed = [(d["name"], tuple(int(s) for s in d["shape"])) for d in header["arrays"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptFileError(f"{path}: bad header field: {exc}") from exc
    model = new_model(spec)
    expect = []
    for i in range(len(spec.conv)):
        expect += [(f"conv{i}.w", model.conv_w[i].shape), (f"conv{i}.b", model.conv_b[i].shape)]
    for i in range(len(spec.dense) + 1):
        expect += [(f"dense{i}.w", model.dense_w[i].shape), (f"dense{i}.b", model.dense_b[i].shape)]
    if listed != expect:
        raise CorruptFileError(f"{path}: array manifest does not match architecture")
    total = sum(int(np.prod(s)) for _, s in listed) * 4
    if total != len(payload):
        raise CorruptFileError(f"{path}: payload is {len(payload)} bytes, expected {total}")
    off = 0
    out = []
    for _, shape in listed:
        n = int(np.prod(shape))
        arr = np.frombuffer(payload, dtype="<f4", count=n, offset=off).astype(np.float64)
        out.append(arr.reshape(shape))
        off += n * 4
    k = 0
    for i in range(len(spec.conv)):
        model.conv_w[i] = out[k]; model.conv_b[i] = out[k + 1]; k += 2
    for i in range(len(spec.dense) + 1):
        model.dense_w[i] = out[k]; model.dense_b[i] = out[k + 1]; k += 2
    return model
