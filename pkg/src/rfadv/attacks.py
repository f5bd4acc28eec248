"""Input-specific evasion attacks on the classifier through a known channel.

All attacks are gradient-based and respect a hard transmit power budget
||delta||_2^2 <= p_max. The complex pairing convention everywhere: a real
gradient of length 2p maps to g = g_I + j*g_Q, and the real inner product
between waveforms equals Re(u^H v), so descending a class loss means steering
the RECEIVED perturbation along -gradient.

Targeted attacks pick the easiest wrong class by bisecting, per class, the
smallest received-amplitude scale that flips the decision (bracket [0, p_max],
kept in those units deliberately). Channel-aware variants:

  * channel inversion: pre-divide by the taps so the received perturbation is
    exactly the no-channel one, at whatever power survives the division;
  * MMSE: per-tap Wiener-style tradeoff delta_i = s*gamma*conj(h_i)*ref_i /
    (|h_i|^2 + lambda), lambda >= 0 from the power constraint (or fixed),
    gamma by line search, sign s = -1 targeted / +1 non-targeted;
  * received-power maximizing (mrpp): conjugate-tap-weighted gradient
    direction, which maximizes delivered perturbation power per unit transmit
    power.

The `delta_noch` reference passed to inversion/MMSE is the POSITIVE gradient
direction scaled to sqrt(p_max); the targeted sign flip happens inside each
attack. That convention keeps the all-ones-channel reductions exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .errors import ConfigurationError, DegenerateGradientError, RfadvError
from .numerics import bisect_predicate

__all__ = [
    "PowerBudget", "TargetedSearchConfig", "MmseConfig", "AttackOutcome",
    "fgm_gradient", "targeted_noch", "targeted_mrpp",
    "targeted_channel_inversion", "targeted_mmse",
    "nontargeted_naive", "nontargeted_mrpp", "nontargeted_mmse",
    "mmse_solution", "solve_mmse", "line_search_gamma",
]

BUDGET_RTOL = 1e-9


@dataclass(frozen=True)
class PowerBudget:
    p_max: float

    def __post_init__(self):
        if not (self.p_max > 0):
            raise ConfigurationError(f"p_max must be positive, got {self.p_max}")

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.p_max)

    def check(self, delta: np.ndarray) -> None:
        e = float(np.sum(np.abs(delta) ** 2))
        if e > self.p_max * (1.0 + BUDGET_RTOL):
            raise RfadvError(f"budget violated: ||delta||^2={e} > p_max={self.p_max}")


@dataclass(frozen=True)
class TargetedSearchConfig:
    """Per-class flip-threshold search settings.

    eps_acc is the absolute bracket tolerance (must be in (0, p_max)); when
    None it defaults to eps_acc_frac * p_max. full_budget=True transmits the
    whole budget along the chosen direction; False scales by the found
    threshold instead (capped at the budget amplitude).
    """
    eps_acc: float | None = None
    eps_acc_frac: float = 1.0 / 128.0
    full_budget: bool = True

    def resolve_eps_acc(self, p_max: float) -> float:
        acc = self.eps_acc if self.eps_acc is not None else self.eps_acc_frac * p_max
        if not (0.0 < acc < p_max):
            raise ConfigurationError(f"eps_acc must be in (0, p_max), got {acc}")
        return acc


@dataclass(frozen=True)
class MmseConfig:
    gammas: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    lambda_mode: str = "power"   # "power": lambda from the budget; "fixed"
    fixed_lambda: float = 1.2

    def __post_init__(self):
        if self.lambda_mode not in ("power", "fixed"):
            raise ConfigurationError(f"unknown lambda_mode {self.lambda_mode!r}")
        if len(self.gammas) == 0 or any(g <= 0 for g in self.gammas):
            raise ConfigurationError("gammas must be positive and nonempty")
        if self.lambda_mode == "fixed" and self.fixed_lambda < 0:
            raise ConfigurationError("fixed_lambda must be >= 0")


@dataclass
class AttackOutcome:
    """A crafted perturbation plus everything needed to audit it."""
    delta: np.ndarray                 # transmit vector, complex (p,)
    kind: str
    budget: PowerBudget
    target: int | None = None         # chosen class index (targeted kinds)
    direction: np.ndarray | None = None  # unit positive direction pre sign flip
    eps_table: np.ndarray | None = None  # per-class flip thresholds, NaN at y_true
    feasible: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.budget.check(self.delta)

    def transmit_power(self) -> float:
        return float(np.sum(np.abs(self.delta) ** 2))

    def report(self) -> dict:
        """JSON-ready summary (the binary delta is stored separately)."""
        out = {
            "kind": self.kind,
            "p_max": self.budget.p_max,
            "transmit_power": self.transmit_power(),
            "target": self.target,
            "feasible": self.feasible,
            "diagnostics": {k: v for k, v in self.diagnostics.items()
                            if isinstance(v, (int, float, str, bool, list))},
        }
        if self.eps_table is not None:
            out["eps_table"] = [None if math.isnan(v) else float(v)
                                for v in self.eps_table]
        return out


_FALLBACK_FLAG = "degenerate_gradient_fallback"


def _as_complex(g: np.ndarray) -> np.ndarray:
    p = g.shape[-1] // 2
    return g[..., :p] + 1j * g[..., p:]


def _fallback_direction(p: int) -> np.ndarray:
    e = np.zeros(p, dtype=np.complex128)
    e[0] = 1.0
    return e


def fgm_gradient(model, x: np.ndarray, y: int, weighting: str = "none",
                 h: ChannelRealization | None = None) -> tuple[np.ndarray, float]:
    """Unit-norm complex attack direction from one loss gradient.

    weighting "none" normalizes the raw gradient; "conj-channel" first
    multiplies by conj(h_i), which points the TRANSMIT vector so the received
    perturbation power is maximal for its budget. Raises
    DegenerateGradientError on a vanishing gradient.
    """
    g = _as_complex(model.input_gradient(x, y))
    if weighting == "conj-channel":
        if h is None:
            raise ConfigurationError("conj-channel weighting needs a channel")
        g = np.conj(h.taps) * g
    elif weighting != "none":
        raise ConfigurationError(f"unknown weighting {weighting!r}")
    n = float(np.linalg.norm(g))
    if n == 0.0:
        raise DegenerateGradientError("input gradient vanished")
    return g / n, n


def _targeted_search(model, x, y_true: int, h: ChannelRealization,
                     budget: PowerBudget, cfg: TargetedSearchConfig, kind: str
                     ) -> AttackOutcome:
    """Shared per-class search behind the no-channel and mrpp attacks.

    For every class c != y_true, bisect the smallest received scale eps in
    [0, p_max] such that x - eps*(h o dir_c) flips the decision away from
    y_true; classes that never flip keep eps = p_max and are flagged. The
    chosen target minimizes eps (ties: lowest class index).
    """
    p = model.spec.p
    n_classes = model.spec.n_classes
    if not (0 <= y_true < n_classes):
        raise ConfigurationError(f"label {y_true} out of range")
    eps_acc = cfg.resolve_eps_acc(budget.p_max)
    others = np.array([c for c in range(n_classes) if c != y_true])

    grads = model.input_gradient(np.tile(x, (len(others), 1)), others)
    gc = _as_complex(grads) * np.conj(h.taps)[None, :]
    norms = np.linalg.norm(gc, axis=1)
    fell_back = norms == 0.0
    dirs = np.where(fell_back[:, None], _fallback_direction(p)[None, :],
                    gc / np.where(norms[:, None] == 0.0, 1.0, norms[:, None]))
    received = dirs * h.taps[None, :]

    lo = np.zeros(len(others))
    hi = np.full(len(others), budget.p_max)
    flipped = np.zeros(len(others), dtype=bool)
    iters = math.ceil(math.log2(budget.p_max / eps_acc))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        preds = model.predict_index(x[None, :] - mid[:, None] * received)
        flip = preds != y_true
        hi = np.where(flip, mid, hi)
        lo = np.where(flip, lo, mid)
        flipped |= flip

    pos = int(np.argmin(hi))
    target = int(others[pos])
    direction = dirs[pos]
    scale = budget.amplitude if cfg.full_budget else min(hi[pos], budget.amplitude)
    delta = -scale * direction

    eps_table = np.full(n_classes, np.nan)
    eps_table[others] = hi
    diags = {
        "eps_acc": eps_acc,
        "search_iterations": iters,
        "flipped_classes": [int(c) for c in others[flipped]],
        _FALLBACK_FLAG: bool(fell_back.any()),
        "received_power": float(np.sum(np.abs(h.taps * delta) ** 2)),
    }
    return AttackOutcome(delta=delta, kind=kind, budget=budget, target=target,
                         direction=direction, eps_table=eps_table,
                         feasible=bool(flipped.any()), diagnostics=diags)


def targeted_noch(model, x: np.ndarray, y_true: int, budget: PowerBudget,
                  cfg: TargetedSearchConfig = TargetedSearchConfig()) -> AttackOutcome:
    """Channel-blind targeted attack (taps assumed all-ones while crafting)."""
    ident = ChannelRealization.identity(model.spec.p)
    return _targeted_search(model, x, y_true, ident, budget, cfg, kind="noch")


def targeted_mrpp(model, x: np.ndarray, y_true: int, h: ChannelRealization,
                  budget: PowerBudget,
                  cfg: TargetedSearchConfig = TargetedSearchConfig()) -> AttackOutcome:
    """Targeted attack with conjugate-tap weighting (max received power)."""
    return _targeted_search(model, x, y_true, h, budget, cfg, kind="mrpp-targeted")


def _floor_taps(taps: np.ndarray, floor: float) -> np.ndarray:
    mags = np.abs(taps)
    out = taps.copy()
    dead = mags == 0.0
    out[dead] = floor
    weak = (~dead) & (mags < floor)
    out[weak] = taps[weak] * (floor / mags[weak])
    return out


def targeted_channel_inversion(delta_noch: np.ndarray, h: ChannelRealization,
                               budget: PowerBudget, tap_floor: float = 1e-12
                               ) -> AttackOutcome:
    """Pre-equalize the no-channel attack: delta = -alpha * (ref / h).

    delta_noch is the positive reference direction scaled to sqrt(p_max). The
    received perturbation is exactly -alpha * delta_noch: perfectly aligned,
    but alpha collapses when any tap is deep in a fade. Taps below tap_floor
    are floored (phase kept) to avoid infinities.
    """
    taps = _floor_taps(h.taps, tap_floor)
    raw = np.asarray(delta_noch, dtype=np.complex128) / taps
    nrm = float(np.linalg.norm(raw))
    if nrm == 0.0:
        raise DegenerateGradientError("zero reference perturbation")
    alpha = budget.amplitude / nrm
    delta = -alpha * raw
    diags = {
        "alpha": alpha,
        "received_power": float(np.sum(np.abs(h.taps * delta) ** 2)),
    }
    return AttackOutcome(delta=delta, kind="channel-inversion", budget=budget,
                         diagnostics=diags)


def mmse_solution(delta_noch: np.ndarray, h: ChannelRealization,
                  budget: PowerBudget, gamma: float,
                  cfg: MmseConfig = MmseConfig()) -> tuple[np.ndarray, float]:
    """Positive KKT-stationary point of min ||h o d - gamma*ref||^2 s.t. power.

    Returns (delta_plus, lambda) with delta_plus_i = gamma*conj(h_i)*ref_i /
    (|h_i|^2 + lambda). In "power" mode lambda >= 0 is bisected until the
    constraint is met to near machine precision (lambda = 0 when the
    unconstrained solution is already inside the budget); complementary
    slackness and the stationarity identity hold by construction. In "fixed"
    mode the given lambda is used as-is and NO rescale happens here.
    """
    ref = np.asarray(delta_noch, dtype=np.complex128)
    if gamma <= 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    a2 = np.abs(h.taps) ** 2
    num = gamma * np.conj(h.taps) * ref
    num2 = np.abs(num) ** 2

    def power(lam: float) -> float:
        den = a2 + lam
        safe = np.where(den > 0.0, den, 1.0)
        return float(np.sum(np.where(den > 0.0, num2 / safe ** 2, 0.0)))

    if cfg.lambda_mode == "fixed":
        lam = cfg.fixed_lambda
    else:
        if power(0.0) <= budget.p_max:
            lam = 0.0
        else:
            hi = 1.0
            for _ in range(600):
                if power(hi) <= budget.p_max:
                    break
                hi *= 4.0
            else:  # pragma: no cover
                raise RfadvError("lambda expansion failed")
            _, lam, _ = bisect_predicate(lambda l: power(l) <= budget.p_max,
                                         0.0, hi, tol=max(hi * 1e-15, 5e-324))
    den = a2 + lam
    delta_plus = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    return delta_plus, float(lam)


def solve_mmse(delta_noch: np.ndarray, h: ChannelRealization, budget: PowerBudget,
               gamma: float, sign: str, cfg: MmseConfig = MmseConfig()
               ) -> AttackOutcome:
    """MMSE attack vector. sign "targeted" descends (factor -1), "nontargeted"
    ascends (+1). Fixed-lambda results are rescaled onto the budget sphere."""
    if sign not in ("targeted", "nontargeted"):
        raise ConfigurationError(f"sign must be targeted/nontargeted, got {sign!r}")
    delta_plus, lam = mmse_solution(delta_noch, h, budget, gamma, cfg)
    s = -1.0 if sign == "targeted" else 1.0
    delta = s * delta_plus
    if cfg.lambda_mode == "fixed":
        nrm = float(np.linalg.norm(delta))
        if nrm == 0.0:
            raise DegenerateGradientError("zero MMSE solution")
        delta = delta * (budget.amplitude / nrm)
    diags = {
        "gamma": gamma,
        "lambda": lam,
        "sign": sign,
        "received_power": float(np.sum(np.abs(h.taps * delta) ** 2)),
    }
    kind = "mmse-targeted" if sign == "targeted" else "mmse-nontargeted"
    return AttackOutcome(delta=delta, kind=kind, budget=budget, diagnostics=diags)


def line_search_gamma(model, x: np.ndarray, y: int, h: ChannelRealization,
                      budget: PowerBudget, delta_noch: np.ndarray, sign: str,
                      cfg: MmseConfig = MmseConfig()) -> float:
    """Pick gamma from cfg.gammas by the post-attack loss at label y through
    the noiseless channel: minimal loss for targeted (y is the target class),
    maximal for non-targeted (y is the true class). Ties keep grid order."""
    losses = []
    for gamma in cfg.gammas:
        out = solve_mmse(delta_noch, h, budget, gamma, sign, cfg)
        losses.append(model.loss(x + h.taps * out.delta, y))
    arr = np.asarray(losses)
    pos = int(np.argmin(arr)) if sign == "targeted" else int(np.argmax(arr))
    return float(cfg.gammas[pos])


def targeted_mmse(model, x: np.ndarray, y_true: int, h: ChannelRealization,
                  budget: PowerBudget,
                  search_cfg: TargetedSearchConfig = TargetedSearchConfig(),
                  mmse_cfg: MmseConfig = MmseConfig()) -> AttackOutcome:
    """Full targeted MMSE pipeline: choose the target channel-blind, then
    shape the reference through the taps."""
    base = targeted_noch(model, x, y_true, budget, search_cfg)
    ref = budget.amplitude * base.direction
    gamma = line_search_gamma(model, x, base.target, h, budget, ref,
                              "targeted", mmse_cfg)
    out = solve_mmse(ref, h, budget, gamma, "targeted", mmse_cfg)
    out.target = base.target
    out.direction = base.direction
    out.eps_table = base.eps_table
    out.feasible = base.feasible
    out.diagnostics.update({k: base.diagnostics[k] for k in (_FALLBACK_FLAG,)})
    return out


def _iterative_ascent(model, x, y_true: int, h: ChannelRealization,
                      budget: PowerBudget, epochs: int, conj_weight: bool,
                      kind: str) -> AttackOutcome:
    """Shared loop behind the naive and tap-weighted non-targeted attacks.

    Splits the budget over `epochs` gradient-ascent steps on the true-label
    loss, walking the crafting input through the channel after each step, and
    renormalizes the accumulated direction onto the budget sphere.
    """
    if epochs < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {epochs}")
    p = model.spec.p
    step = math.sqrt(budget.p_max / epochs)
    cur = np.array(x, dtype=np.complex128)
    acc = np.zeros(p, dtype=np.complex128)
    fell_back = False
    for _ in range(epochs):
        g = _as_complex(model.input_gradient(cur, y_true))
        if conj_weight:
            g = np.conj(h.taps) * g
        n = float(np.linalg.norm(g))
        if n == 0.0:
            fell_back = True
            break
        d = g / n
        cur = cur + step * (h.taps * d)
        acc = acc + step * d
    nrm = float(np.linalg.norm(acc))
    if nrm == 0.0:
        acc = _fallback_direction(p)
        nrm = 1.0
        fell_back = True
    delta = budget.amplitude * acc / nrm
    diags = {
        "epochs": epochs,
        _FALLBACK_FLAG: fell_back,
        "received_power": float(np.sum(np.abs(h.taps * delta) ** 2)),
    }
    return AttackOutcome(delta=delta, kind=kind, budget=budget, diagnostics=diags)


def nontargeted_naive(model, x: np.ndarray, y_true: int, h: ChannelRealization,
                      budget: PowerBudget, epochs: int = 4) -> AttackOutcome:
    """Iterative ascent along raw gradient directions (channel ignored when
    picking directions, but each step still lands through the channel)."""
    return _iterative_ascent(model, x, y_true, h, budget, epochs,
                             conj_weight=False, kind="naive-nontargeted")


def nontargeted_mrpp(model, x: np.ndarray, y_true: int, h: ChannelRealization,
                     budget: PowerBudget, epochs: int = 4) -> AttackOutcome:
    """Iterative ascent with conjugate-tap weighting on every step."""
    return _iterative_ascent(model, x, y_true, h, budget, epochs,
                             conj_weight=True, kind="mrpp-nontargeted")


def nontargeted_mmse(model, x: np.ndarray, y_true: int, h: ChannelRealization,
                     budget: PowerBudget, epochs: int = 4,
                     mmse_cfg: MmseConfig = MmseConfig()) -> AttackOutcome:
    """Non-targeted MMSE: shape the channel-blind ascent reference by the taps."""
    ident = ChannelRealization.identity(model.spec.p)
    base = nontargeted_naive(model, x, y_true, ident, budget, epochs)
    gamma = line_search_gamma(model, x, y_true, h, budget, base.delta,
                              "nontargeted", mmse_cfg)
    out = solve_mmse(base.delta, h, budget, gamma, "nontargeted", mmse_cfg)
    out.diagnostics[_FALLBACK_FLAG] = base.diagnostics[_FALLBACK_FLAG]
    out.kind = "mmse-nontargeted"
    return out
