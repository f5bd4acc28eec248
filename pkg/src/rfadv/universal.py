"""Perturbations that survive unknown inputs and/or unknown channels.

The common recipe: craft one white-box perturbation per (input, channel)
scenario, stack them as rows of a real matrix [Re | Im], and keep the first
right singular vector as the shared direction (rows are NOT mean-centered by
default, matching the plain-SVD construction; centering is available for
study). The sign of the singular vector is ambiguous, so it is resolved by
whichever of +/- yields the larger mean true-label loss over the crafting
scenarios, evaluated through the crafting channels (ties pick +).

Variants:
  * limited-channel: one known input, N channel draws (channel distribution
    known, realization unknown);
  * uap-inputs: N pre-collected inputs, the actual channel known;
  * uap-limited: N pre-collected inputs, each paired with a fresh channel
    draw (neither the eval input nor the realization known);
  * uap-blackbox: uap-limited crafted entirely against a substitute model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attacks import (AttackOutcome, MmseConfig, PowerBudget,
                      TargetedSearchConfig, nontargeted_naive,
                      nontargeted_mrpp, targeted_mrpp, targeted_noch)
from .channel import ChannelModelParams, ChannelRealization, sample_channel
from .errors import ConfigurationError, DegenerateGradientError, RfadvError
from .numerics import first_right_singular

__all__ = ["CraftingSet", "UapPerturbation", "choose_sign",
           "craft_limited_channel", "craft_uap_inputs", "craft_uap_limited",
           "craft_uap_blackbox", "INNER_ATTACKS"]


@dataclass
class CraftingSet:
    """Pre-collected clean received signals with their true labels."""
    inputs: np.ndarray   # complex (N, p)
    labels: np.ndarray   # int (N,)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.complex128)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2 or self.labels.shape != (self.inputs.shape[0],):
            raise ConfigurationError("crafting set needs (N,p) inputs and (N,) labels")
        if self.inputs.shape[0] < 1:
            raise ConfigurationError("crafting set is empty")

    def __len__(self) -> int:
        return self.inputs.shape[0]


@dataclass
class UapPerturbation:
    """An input-agnostic perturbation; applied unchanged to every input."""
    delta: np.ndarray
    kind: str
    budget: PowerBudget
    sign: int
    sigma1: float
    rows_used: int
    rows_failed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        e = float(np.sum(np.abs(self.delta) ** 2))
        if abs(e - self.budget.p_max) > 1e-9 * self.budget.p_max:
            raise RfadvError(f"universal delta off the budget sphere: {e}")

    def report(self) -> dict:
        """JSON-ready summary (the vector itself lives in the container payload)."""
        return {
            "kind": self.kind,
            "p_max": self.budget.p_max,
            "transmit_power": float(np.sum(np.abs(self.delta) ** 2)),
            "sign": self.sign,
            "sigma1": self.sigma1,
            "rows_used": self.rows_used,
            "rows_failed": self.rows_failed,
            "meta": dict(self.meta),
        }


def _inner_mrpp_nt(model, x, y, h, budget, params):
    return nontargeted_mrpp(model, x, y, h, budget, epochs=params.get("epochs", 1))


def _inner_naive_nt(model, x, y, h, budget, params):
    return nontargeted_naive(model, x, y, h, budget, epochs=params.get("epochs", 1))


def _inner_mrpp_t(model, x, y, h, budget, params):
    cfg = params.get("search_cfg", TargetedSearchConfig())
    return targeted_mrpp(model, x, y, h, budget, cfg)


def _inner_noch_t(model, x, y, h, budget, params):
    cfg = params.get("search_cfg", TargetedSearchConfig())
    return targeted_noch(model, x, y, budget, cfg)


INNER_ATTACKS = {
    "mrpp-nontargeted": _inner_mrpp_nt,
    "naive-nontargeted": _inner_naive_nt,
    "mrpp-targeted": _inner_mrpp_t,
    "noch": _inner_noch_t,
}


def choose_sign(model, direction: np.ndarray, budget: PowerBudget,
                scenarios: list[tuple[np.ndarray, int, ChannelRealization]]) -> int:
    """+1 or -1: the orientation of `direction` with the larger mean
    true-label loss over (input, label, channel) scenarios; ties give +1."""
    if not scenarios:
        raise ConfigurationError("no scenarios to orient against")
    amp = budget.amplitude
    xs_p = np.stack([x + h.taps * (amp * direction) for x, _, h in scenarios])
    xs_m = np.stack([x - h.taps * (amp * direction) for x, _, h in scenarios])
    ys = np.array([y for _, y, _ in scenarios], dtype=np.int64)
    mean_p = float(np.mean(model.loss(xs_p, ys)))
    mean_m = float(np.mean(model.loss(xs_m, ys)))
    return 1 if mean_p >= mean_m else -1


def _pca_direction(rows: list[np.ndarray], p: int, center_rows: bool):
    stack = np.stack([np.concatenate([r.real, r.imag]) for r in rows])
    if center_rows:
        stack = stack - stack.mean(axis=0, keepdims=True)
    sigma1, v1 = first_right_singular(stack)
    return v1[:p] + 1j * v1[p:], sigma1


def _finish(model, direction, sigma1, budget, scenarios, kind, used, failed, meta):
    sign = choose_sign(model, direction, budget, scenarios)
    delta = sign * budget.amplitude * direction
    return UapPerturbation(delta=delta, kind=kind, budget=budget, sign=sign,
                           sigma1=sigma1, rows_used=used, rows_failed=failed,
                           meta=meta)


def _craft_rows(model, scenarios, budget, inner: str, inner_params: dict
                ) -> tuple[list[np.ndarray], list, int]:
    """Run the inner attack per scenario; failed rows are dropped (flagged)."""
    if inner not in INNER_ATTACKS:
        raise ConfigurationError(
            f"unknown inner attack {inner!r}; choose from {sorted(INNER_ATTACKS)}")
    fn = INNER_ATTACKS[inner]
    rows, kept, failed = [], [], 0
    for x, y, h in scenarios:
        try:
            out: AttackOutcome = fn(model, x, int(y), h, budget, inner_params)
        except DegenerateGradientError:
            failed += 1
            continue
        rows.append(out.delta)
        kept.append((x, int(y), h))
    if len(rows) < 2:
        raise RfadvError(f"only {len(rows)} usable rows (need >= 2)")
    return rows, kept, failed


def craft_limited_channel(model, x: np.ndarray, y_true: int,
                          params: ChannelModelParams, budget: PowerBudget,
                          n_channels: int, rng: np.random.Generator,
                          inner: str = "mrpp-nontargeted",
                          inner_params: dict | None = None,
                          center_rows: bool = False) -> UapPerturbation:
    """Known input, unknown realization: attack N channel draws, keep the
    dominant shared direction."""
    if n_channels < 2:
        raise ConfigurationError("need at least 2 channel draws")
    p = model.spec.p
    scenarios = [(np.asarray(x, dtype=np.complex128), int(y_true),
                  sample_channel(params, p, rng)) for _ in range(n_channels)]
    rows, kept, failed = _craft_rows(model, scenarios, budget, inner,
                                     inner_params or {})
    direction, sigma1 = _pca_direction(rows, p, center_rows)
    return _finish(model, direction, sigma1, budget, kept, "limited-channel",
                   len(rows), failed, {"n_channels": n_channels, "inner": inner})


def craft_uap_inputs(model, crafting: CraftingSet, h: ChannelRealization,
                     budget: PowerBudget, inner: str = "mrpp-nontargeted",
                     inner_params: dict | None = None,
                     center_rows: bool = False) -> UapPerturbation:
    """Unknown input, known channel: one row per pre-collected input."""
    if len(crafting) < 2:
        raise ConfigurationError("need at least 2 crafting inputs")
    p = model.spec.p
    scenarios = [(crafting.inputs[i], int(crafting.labels[i]), h)
                 for i in range(len(crafting))]
    rows, kept, failed = _craft_rows(model, scenarios, budget, inner,
                                     inner_params or {})
    direction, sigma1 = _pca_direction(rows, p, center_rows)
    return _finish(model, direction, sigma1, budget, kept, "uap-inputs",
                   len(rows), failed, {"n_inputs": len(crafting), "inner": inner})


def craft_uap_limited(model, crafting: CraftingSet, params: ChannelModelParams,
                      budget: PowerBudget, rng: np.random.Generator,
                      inner: str = "mrpp-nontargeted",
                      inner_params: dict | None = None,
                      center_rows: bool = False,
                      kind: str = "uap-limited") -> UapPerturbation:
    """Unknown input AND unknown realization: pair input i with channel draw i."""
    if len(crafting) < 2:
        raise ConfigurationError("need at least 2 crafting inputs")
    p = model.spec.p
    scenarios = [(crafting.inputs[i], int(crafting.labels[i]),
                  sample_channel(params, p, rng)) for i in range(len(crafting))]
    rows, kept, failed = _craft_rows(model, scenarios, budget, inner,
                                     inner_params or {})
    direction, sigma1 = _pca_direction(rows, p, center_rows)
    return _finish(model, direction, sigma1, budget, kept, kind,
                   len(rows), failed, {"n_inputs": len(crafting), "inner": inner})


def craft_uap_blackbox(substitute, crafting: CraftingSet,
                       params: ChannelModelParams, budget: PowerBudget,
                       rng: np.random.Generator,
                       inner: str = "mrpp-nontargeted",
                       inner_params: dict | None = None,
                       center_rows: bool = False) -> UapPerturbation:
    """Transferability attack: the whole pipeline runs on a substitute model
    trained independently of the victim; the victim is never queried."""
    out = craft_uap_limited(substitute, crafting, params, budget, rng,
                            inner, inner_params, center_rows, kind="uap-blackbox")
    out.meta["substitute"] = True
    return out
