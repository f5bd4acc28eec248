"""Accuracy-vs-PNR experiment harness.

The perturbation-to-noise ratio fixes the power budget against the receiver
noise floor: p_max = p * sigma2 * 10^(pnr/10), divided by the channel's mean
power gain when PNR is referenced at the receiver (the default; the adversary
reference skips the division). Mean gain is a Monte-Carlo estimate with a
fixed sub-seed so budgets never depend on the experiment seed.

Trials are paired: channel, noise and the evaluated sample are drawn from
streams keyed only by (seed, trial), never by attack kind or PNR, so every
row of a sweep sees identical randomness and accuracy differences come from
the attacks alone. Attacks are crafted on the noiseless received signal.
Universal perturbations are crafted once per grid point and applied unchanged
to every trial; input-specific attacks are re-crafted per trial.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .attacks import (MmseConfig, PowerBudget, TargetedSearchConfig,
                      nontargeted_mmse, nontargeted_naive, nontargeted_mrpp,
                      targeted_channel_inversion, targeted_mmse, targeted_mrpp,
                      targeted_noch)
from .channel import (ChannelModelParams, ChannelRealization, NoiseSpec,
                      receive, sample_channel)
from .errors import ConfigurationError, CsvParseError
from .numerics import derive_rng
from .universal import (CraftingSet, craft_limited_channel, craft_uap_blackbox,
                        craft_uap_inputs, craft_uap_limited)

__all__ = ["ATTACK_KINDS", "AttackParams", "SweepRow", "pnr_to_budget",
           "mean_power_gain", "evaluate_accuracy", "run_sweep",
           "write_sweep_csv", "read_sweep_csv", "CSV_HEADER", "CSV_COMMENT",
           "make_crafting_set", "attack_params_from_dict",
           "load_sweep_config", "sweep_from_config"]

ATTACK_KINDS = (
    "noch", "channel-inversion", "mmse-targeted", "mrpp-targeted",
    "naive-nontargeted", "mmse-nontargeted", "mrpp-nontargeted",
    "limited-channel", "uap-inputs", "uap-limited", "uap-blackbox",
)

_UNIVERSAL_CACHED = ("uap-limited", "uap-blackbox")  # crafted once per budget
_UAP_KINDS = ("uap-inputs", "uap-limited", "uap-blackbox")

CSV_COMMENT = "# rfadv-sweep v1"
CSV_HEADER = ("attack", "pnr_db", "snr_db", "accuracy", "trials", "seed")

_GAIN_SEED = 0x52464144  # fixed; budgets must not move with the experiment seed
_gain_cache: dict = {}


def mean_power_gain(params: ChannelModelParams, p: int, draws: int = 10000) -> float:
    """Monte-Carlo mean of (1/p) sum |h_i|^2 over the channel distribution."""
    key = (params, p, draws)
    if key not in _gain_cache:
        rng = derive_rng(_GAIN_SEED, "gain", params.k_gain, params.d0, params.d,
                         params.gamma_pl, params.shadow_sigma_db,
                         params.shadow_mode, params.fading, params.normalize_gain)
        total = 0.0
        for _ in range(draws):
            total += sample_channel(params, p, rng).mean_power()
        _gain_cache[key] = total / draws
    return _gain_cache[key]


def pnr_to_budget(pnr_db: float, sigma2: float, p: int,
                  reference: str = "receiver",
                  params: ChannelModelParams | None = None) -> PowerBudget:
    """Power budget realizing a perturbation-to-noise ratio.

    "adversary" references transmit power against the noise floor directly;
    "receiver" (default) divides by the channel's mean power gain so the
    DELIVERED perturbation power sits at the requested ratio.
    """
    if sigma2 <= 0:
        raise ConfigurationError(f"sigma2 must be positive, got {sigma2}")
    p_max = p * sigma2 * 10.0 ** (pnr_db / 10.0)
    if reference == "receiver":
        if params is None:
            raise ConfigurationError("receiver reference needs channel params")
        p_max /= mean_power_gain(params, p)
    elif reference != "adversary":
        raise ConfigurationError(f"unknown PNR reference {reference!r}")
    return PowerBudget(p_max=p_max)


@dataclass(frozen=True)
class AttackParams:
    """Per-attack knobs shared by the harness and the CLI."""
    search: TargetedSearchConfig = field(default_factory=TargetedSearchConfig)
    mmse: MmseConfig = field(default_factory=MmseConfig)
    epochs: int = 4                      # non-targeted ascent steps
    uap_count: int = 40                  # pre-collected inputs for uap-*
    uap_channels: int = 10               # channel draws for limited-channel
    uap_inner: str = "mrpp-nontargeted"
    uap_inner_epochs: int = 1
    center_rows: bool = False


@dataclass
class SweepRow:
    attack: str
    pnr_db: float
    snr_db: float
    accuracy: float
    successes: int
    trials: int
    mean_received_power: float
    seed: int


def _craft(kind: str, model, x, y, h_ar, budget, params: AttackParams,
           rng, crafting_set, channel_params, substitute):
    if kind == "noch":
        return targeted_noch(model, x, y, budget, params.search).delta
    if kind == "channel-inversion":
        base = targeted_noch(model, x, y, budget, params.search)
        ref = budget.amplitude * base.direction
        return targeted_channel_inversion(ref, h_ar, budget).delta
    if kind == "mmse-targeted":
        return targeted_mmse(model, x, y, h_ar, budget, params.search,
                             params.mmse).delta
    if kind == "mrpp-targeted":
        return targeted_mrpp(model, x, y, h_ar, budget, params.search).delta
    if kind == "naive-nontargeted":
        return nontargeted_naive(model, x, y, h_ar, budget, params.epochs).delta
    if kind == "mmse-nontargeted":
        return nontargeted_mmse(model, x, y, h_ar, budget, params.epochs,
                                params.mmse).delta
    if kind == "mrpp-nontargeted":
        return nontargeted_mrpp(model, x, y, h_ar, budget, params.epochs).delta
    if kind == "limited-channel":
        return craft_limited_channel(
            model, x, y, channel_params, budget, params.uap_channels, rng,
            params.uap_inner, {"epochs": params.uap_inner_epochs},
            params.center_rows).delta
    if kind == "uap-inputs":
        return craft_uap_inputs(
            model, crafting_set, h_ar, budget, params.uap_inner,
            {"epochs": params.uap_inner_epochs}, params.center_rows).delta
    raise ConfigurationError(f"unknown attack kind {kind!r}")


def evaluate_accuracy(model, eval_x: np.ndarray, eval_y: np.ndarray,
                      kind: str | None, channel_params: ChannelModelParams,
                      noise: NoiseSpec, trials: int, seed: int,
                      budget: PowerBudget | None = None,
                      params: AttackParams = AttackParams(),
                      crafting_set: CraftingSet | None = None,
                      substitute=None) -> SweepRow:
    """Mean accuracy over paired Monte-Carlo trials under one attack kind.

    kind=None (or "none") measures the no-attack baseline with the same
    randomness. eval_x rows are clean transmitted waveforms cycled trial by
    trial; the transmitter channel is the identity.
    """
    if kind in (None, "none"):
        kind = None
    elif kind not in ATTACK_KINDS:
        raise ConfigurationError(
            f"unknown attack kind {kind!r}; choose from {ATTACK_KINDS}")
    if kind is not None and budget is None:
        raise ConfigurationError("attacks need a power budget")
    eval_x = np.asarray(eval_x, dtype=np.complex128)
    eval_y = np.asarray(eval_y, dtype=np.int64)
    if len(eval_x) == 0 or trials < 1:
        raise ConfigurationError("empty eval set or non-positive trials")
    p = model.spec.p
    h_tr = ChannelRealization.identity(p)

    if kind in _UAP_KINDS and crafting_set is None:
        raise ConfigurationError(f"{kind} needs a crafting set")
    cached_uap = None
    if kind in _UNIVERSAL_CACHED:
        craft_rng = derive_rng(seed, "uapcraft", kind, budget.p_max)
        if kind == "uap-limited":
            cached_uap = craft_uap_limited(
                model, crafting_set, channel_params, budget, craft_rng,
                params.uap_inner, {"epochs": params.uap_inner_epochs},
                params.center_rows)
        else:
            if substitute is None:
                raise ConfigurationError("uap-blackbox needs a substitute model")
            cached_uap = craft_uap_blackbox(
                substitute, crafting_set, channel_params, budget, craft_rng,
                params.uap_inner, {"epochs": params.uap_inner_epochs},
                params.center_rows)

    correct = 0
    received_power_sum = 0.0
    for t in range(trials):
        idx = t % len(eval_x)
        x, y = eval_x[idx], int(eval_y[idx])
        h_ar = sample_channel(channel_params, p, derive_rng(seed, "chan", t))
        noise_rng = derive_rng(seed, "noise", t)
        delta = None
        if kind is not None:
            if cached_uap is not None:
                delta = cached_uap.delta  # same vector every trial, by design
            else:
                rng = derive_rng(seed, "attack", kind, t)
                delta = _craft(kind, model, x, y, h_ar, budget, params, rng,
                               crafting_set, channel_params, substitute)
            received_power_sum += float(np.sum(np.abs(h_ar.taps * delta) ** 2))
        r = receive(x, h_tr, noise, noise_rng, delta=delta, h_ar=h_ar)
        correct += int(model.predict_index(r) == y)
    return SweepRow(
        attack=kind or "none",
        pnr_db=math.nan,
        snr_db=-10.0 * math.log10(noise.sigma2) if noise.sigma2 > 0 else math.inf,
        accuracy=correct / trials,
        successes=trials - correct,
        trials=trials,
        mean_received_power=received_power_sum / trials,
        seed=seed,
    )


def run_sweep(model, eval_x, eval_y, attacks: list[str], pnr_grid_db: list[float],
              channel_params: ChannelModelParams, snr_db: float, trials: int,
              seed: int, pnr_reference: str = "receiver",
              params: AttackParams = AttackParams(),
              crafting_set: CraftingSet | None = None, substitute=None,
              threads: int = 1) -> list[SweepRow]:
    """Evaluate every (attack, pnr) cell; rows come back sorted by (attack, pnr).

    The "none" baseline is PNR-independent and evaluated once. Results are
    identical for any thread count because all randomness is derived from
    (seed, trial).
    """
    if not attacks:
        raise ConfigurationError("empty attack list")
    if not pnr_grid_db and any(a != "none" for a in attacks):
        raise ConfigurationError("empty PNR grid")
    noise = NoiseSpec.from_snr_db(snr_db)
    jobs = []
    for kind in attacks:
        if kind == "none":
            jobs.append(("none", math.nan, None))
            continue
        for pnr in pnr_grid_db:
            budget = pnr_to_budget(pnr, noise.sigma2, model.spec.p,
                                   pnr_reference, channel_params)
            jobs.append((kind, float(pnr), budget))

    def run(job):
        kind, pnr, budget = job
        row = evaluate_accuracy(model, eval_x, eval_y,
                                None if kind == "none" else kind,
                                channel_params, noise, trials, seed, budget,
                                params, crafting_set, substitute)
        row.pnr_db = pnr
        row.snr_db = snr_db
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    rows.sort(key=lambda r: (r.attack, r.pnr_db))
    return rows


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.6f}"


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    buf = io.StringIO()
    buf.write(CSV_COMMENT + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in sorted(rows, key=lambda r: (r.attack, r.pnr_db)):
        writer.writerow([r.attack, _fmt(r.pnr_db), _fmt(r.snr_db),
                         _fmt(r.accuracy), r.trials, r.seed])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_sweep_csv(path) -> list[SweepRow]:
    """Parse a sweep CSV; raises CsvParseError with the offending line number."""
    rows = []
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for ln, raw in enumerate(lines, start=1):
        if raw.startswith("#") or raw.strip() == "":
            continue
        body.append((ln, raw))
    if not body:
        raise CsvParseError("no header row", line=max(len(lines), 1))
    head_ln, head = body[0]
    if tuple(next(csv.reader([head]))) != CSV_HEADER:
        raise CsvParseError(f"bad header {head!r}", line=head_ln)
    if len(body) == 1:
        raise CsvParseError("no data rows", line=head_ln)
    for ln, raw in body[1:]:
        parts = next(csv.reader([raw]))
        if len(parts) != len(CSV_HEADER):
            raise CsvParseError(f"expected {len(CSV_HEADER)} fields, got {len(parts)}",
                                line=ln)
        try:
            rows.append(SweepRow(
                attack=parts[0], pnr_db=float(parts[1]), snr_db=float(parts[2]),
                accuracy=float(parts[3]), successes=0, trials=int(parts[4]),
                mean_received_power=math.nan, seed=int(parts[5])))
        except ValueError as exc:
            raise CsvParseError(str(exc), line=ln) from exc
        if not (math.isnan(rows[-1].accuracy) or 0.0 <= rows[-1].accuracy <= 1.0):
            raise CsvParseError(f"accuracy out of [0,1]: {rows[-1].accuracy}", line=ln)
    return rows


def make_crafting_set(dataset, snr_db: float | None, split: str,
                      count: int) -> CraftingSet:
    """First `count` samples (dataset order) of a split/SNR cell as a
    CraftingSet. Deterministic: the same dataset always yields the same set."""
    subset = dataset.subset(split, snr_db)
    if len(subset) < count:
        raise ConfigurationError(
            f"crafting set wants {count} samples, split {split!r} at "
            f"snr {snr_db} has {len(subset)}")
    chosen = subset[:count]
    x = np.stack([s.iq for s in chosen])
    y = np.array([dataset.class_index(s.label) for s in chosen], dtype=np.int64)
    return CraftingSet(inputs=x, labels=y)


def _snr_value(v) -> float | None:
    if v is None:
        return None
    if v == "inf":
        return math.inf
    return float(v)


def attack_params_from_dict(d: dict) -> AttackParams:
    d = dict(d)
    search = TargetedSearchConfig(
        eps_acc=d.pop("eps_acc", None),
        eps_acc_frac=float(d.pop("eps_acc_frac", 1.0 / 128.0)),
        full_budget=bool(d.pop("full_budget", True)))
    mmse = MmseConfig(
        gammas=tuple(float(g) for g in d.pop("gammas", (0.25, 0.5, 1.0, 2.0, 4.0))),
        lambda_mode=str(d.pop("lambda_mode", "power")),
        fixed_lambda=float(d.pop("fixed_lambda", 1.2)))
    params = AttackParams(
        search=search, mmse=mmse,
        epochs=int(d.pop("epochs", 4)),
        uap_count=int(d.pop("uap_count", 40)),
        uap_channels=int(d.pop("uap_channels", 10)),
        uap_inner=str(d.pop("uap_inner", "mrpp-nontargeted")),
        uap_inner_epochs=int(d.pop("uap_inner_epochs", 1)),
        center_rows=bool(d.pop("center_rows", False)))
    if d:
        raise ConfigurationError(f"unknown attack_params keys: {sorted(d)}")
    return params


_CONFIG_KEYS = {"model", "dataset", "substitute", "split", "eval_snr_db",
                "attacks", "pnr_grid_db", "snr_db", "trials", "seed",
                "pnr_reference", "channel", "attack_params", "crafting",
                "threads", "out"}
_PATH_KEYS = ("model", "dataset", "substitute", "out")


def load_sweep_config(path) -> dict:
    """Read a sweep config JSON; relative paths resolve against the config's
    own directory so configs can be checked in and run from anywhere."""
    with open(path, "r") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"{path}: config must be a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"{path}: unknown config keys: {sorted(unknown)}")
    for key in ("model", "dataset", "attacks", "trials", "seed"):
        if key not in cfg:
            raise ConfigurationError(f"{path}: missing required key {key!r}")
    base = os.path.dirname(os.path.abspath(path))
    for key in _PATH_KEYS:
        if cfg.get(key) and not os.path.isabs(cfg[key]):
            cfg[key] = os.path.join(base, cfg[key])
    return cfg


def sweep_from_config(cfg: dict, threads: int | None = None) -> list[SweepRow]:
    """Run the full sweep described by a loaded config dict."""
    from .classifier import load_model
    from .dataset import load_dataset

    model = load_model(cfg["model"])
    dataset = load_dataset(cfg["dataset"])
    substitute = load_model(cfg["substitute"]) if cfg.get("substitute") else None
    split = cfg.get("split", "test")
    eval_snr = _snr_value(cfg.get("eval_snr_db", "inf"))
    eval_x, eval_y = dataset.as_arrays(split, eval_snr)
    if len(eval_x) == 0:
        raise ConfigurationError(
            f"no samples in split {split!r} at snr {eval_snr}")
    params = attack_params_from_dict(cfg.get("attack_params", {}))
    channel_params = ChannelModelParams(**cfg.get("channel", {}))
    attacks = list(cfg["attacks"])
    crafting = None
    if any(a in _UAP_KINDS for a in attacks):
        c = dict(cfg.get("crafting", {}))
        craft_split = c.pop("split", "train")
        craft_count = int(c.pop("count", params.uap_count))
        if c:
            raise ConfigurationError(f"unknown crafting keys: {sorted(c)}")
        crafting = make_crafting_set(dataset, eval_snr, craft_split, craft_count)
    return run_sweep(
        model, eval_x, eval_y, attacks,
        [float(v) for v in cfg.get("pnr_grid_db", [])],
        channel_params, float(cfg.get("snr_db", 10.0)), int(cfg["trials"]),
        int(cfg["seed"]), cfg.get("pnr_reference", "receiver"), params,
        crafting, substitute,
        threads=int(threads if threads is not None else cfg.get("threads", 1)))
