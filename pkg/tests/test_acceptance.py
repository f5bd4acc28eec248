"""Acceptance gate: ten checks, one printed PASS/FAIL line each.

Numbered tests mirror the shipping checklist. Criteria 1-5 are exact
numerical properties on small instances; 6-8 reproduce the qualitative
attack orderings on the full 8-class model with paired channel/noise draws;
9 is the clean-accuracy bar; 10 pins end-to-end determinism to the golden
CSV. Verdict lines go to the real stderr (visible under -s) and into the
terminal summary via conftest, since fd capture eats live output.
"""
import math
import os
import sys

import numpy as np

import _criteria

from rfadv import (AttackParams, ChannelRealization, GenerationSpec,
                   MmseConfig, PowerBudget, build_dataset, evaluate_accuracy,
                   fgm_gradient, load_sweep_config, mmse_solution,
                   nontargeted_mmse, nontargeted_mrpp, nontargeted_naive,
                   pnr_to_budget, sweep_from_config,
                   targeted_channel_inversion, targeted_mmse, targeted_mrpp,
                   targeted_noch, write_sweep_csv)
from rfadv.channel import NoiseSpec, sample_channel
from rfadv.classifier import ArchitectureSpec, new_model
from rfadv.numerics import derive_rng, first_right_singular
from rfadv.universal import (CraftingSet, craft_limited_channel,
                             craft_uap_blackbox, craft_uap_inputs,
                             craft_uap_limited)

# pinned tolerances and measurement settings
GRAD_PAIRS = 100
GRAD_RTOL = 1e-4
KKT_INSTANCES = 100
KKT_RESIDUAL = 1e-8
KKT_POWER_RTOL = 1e-8
REDUCTION_ATOL = 1e-9
PCA_STACKS = 50
PCA_COS = 1.0 - 1e-8
BUDGET_INSTANCES = 200
BUDGET_RTOL = 1e-9
TRIALS = 500
EVAL_SEED = 42
SNR_DB = 10.0
ORDER_GAP = 0.03   # criterion 6: each ordering gap at least 3 points
NOCH_DROP = 0.05   # criterion 6: NoCh within 5 points of no attack
BB_GAP = 0.05      # criterion 8: limited vs black-box within 5 points
CLEAN_BAR = 0.80   # criterion 9

NOISE = NoiseSpec.from_snr_db(SNR_DB)

_cells: dict = {}  # (kind, pnr) -> accuracy, shared across criteria 6-8


def _criterion(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, file=sys.__stderr__, flush=True)
    _criteria.record(line)
    assert ok, line


def _cell(model, x, y, kind, params, pnr, crafting=None, substitute=None):
    key = (kind, pnr)
    if key not in _cells:
        budget = None if kind is None else pnr_to_budget(
            pnr, NOISE.sigma2, model.spec.p, "receiver", params)
        row = evaluate_accuracy(model, x, y, kind, params, NOISE, TRIALS,
                                EVAL_SEED, budget, AttackParams(),
                                crafting, substitute)
        _cells[key] = row.accuracy
    return _cells[key]


def _fd_gradient(model, x, y, step):
    out = np.empty(2 * len(x))
    for i in range(len(out)):
        e = np.zeros(len(x), dtype=np.complex128)
        if i < len(x):
            e[i] = step
        else:
            e[i - len(x)] = 1j * step
        out[i] = (model.loss(x + e, y) - model.loss(x - e, y)) / (2 * step)
    return out


def test_criterion_1_gradient_fidelity(tiny_model, tiny_eval):
    """Central differences are only a valid oracle on smooth windows, so a
    pair whose fd estimate moves between two step sizes (a relu kink inside
    the window) is resampled; the estimator, not the gradient, is wrong
    there. 100 validated pairs must agree."""
    x_all, _ = tiny_eval
    rng = np.random.default_rng(101)
    worst = 0.0
    checked = attempts = 0
    while checked < GRAD_PAIRS:
        attempts += 1
        assert attempts <= 4 * GRAD_PAIRS, "too many non-smooth fd windows"
        x = x_all[int(rng.integers(len(x_all)))]
        y = int(rng.integers(tiny_model.spec.n_classes))
        g = tiny_model.input_gradient(x, y)
        if np.linalg.norm(g) < 1e-8:
            continue
        fd = _fd_gradient(tiny_model, x, y, 1e-6)
        fd_small = _fd_gradient(tiny_model, x, y, 1.25e-7)
        scale = max(float(np.linalg.norm(fd)), 1e-300)
        if float(np.linalg.norm(fd - fd_small)) / scale > 1e-5:
            continue
        worst = max(worst, float(np.linalg.norm(g - fd)) / scale)
        checked += 1
    _criterion(1, worst < GRAD_RTOL,
               f"max fd relative error {worst:.3e} over {GRAD_PAIRS} smooth "
               f"pairs, {attempts - GRAD_PAIRS} resampled (tol {GRAD_RTOL:.0e})")


def test_criterion_2_mmse_kkt(rayleigh_params):
    rng = np.random.default_rng(202)
    p = 64
    worst_res, worst_pow = 0.0, 0.0
    for i in range(KKT_INSTANCES):
        h = sample_channel(rayleigh_params, p, derive_rng(7, "kkt", i))
        p_max = float(10.0 ** rng.uniform(-3, 3))
        budget = PowerBudget(p_max)
        d = rng.standard_normal(p) + 1j * rng.standard_normal(p)
        ref = budget.amplitude * d / np.linalg.norm(d)
        gamma = float(10.0 ** rng.uniform(-1, 1))
        delta, lam = mmse_solution(ref, h, budget, gamma)
        assert lam >= 0.0
        a2 = np.abs(h.taps) ** 2
        residual = (a2 + lam) * delta - gamma * np.conj(h.taps) * ref
        scale = max(float(np.max(np.abs(gamma * np.conj(h.taps) * ref))), 1e-300)
        worst_res = max(worst_res, float(np.max(np.abs(residual))) / scale)
        power = float(np.sum(np.abs(delta) ** 2))
        assert power <= p_max * (1 + 1e-9)
        if lam > 0.0:
            worst_pow = max(worst_pow, abs(power - p_max) / p_max)
    ok = worst_res < KKT_RESIDUAL and worst_pow < KKT_POWER_RTOL
    _criterion(2, ok, f"stationarity {worst_res:.2e}, active-constraint "
                      f"power error {worst_pow:.2e} over {KKT_INSTANCES} instances")


def test_criterion_3_reduction_equivalence(tiny_model, tiny_eval):
    x_all, y_all = tiny_eval
    ones = ChannelRealization.identity(tiny_model.spec.p)
    budget = PowerBudget(2.0)
    worst = 0.0
    worst_eps = 0.0
    for i in range(10):
        x, y = x_all[i], int(y_all[i])
        base = targeted_noch(tiny_model, x, y, budget)
        for out in (targeted_mrpp(tiny_model, x, y, ones, budget),
                    targeted_mmse(tiny_model, x, y, ones, budget),
                    targeted_channel_inversion(
                        budget.amplitude * base.direction, ones, budget)):
            worst = max(worst, float(np.max(np.abs(out.delta - base.delta))))
            if out.eps_table is not None:
                diff = np.abs(out.eps_table - base.eps_table)
                worst_eps = max(worst_eps, float(np.nanmax(diff)))
        naive = nontargeted_naive(tiny_model, x, y, ones, budget)
        for out in (nontargeted_mrpp(tiny_model, x, y, ones, budget),
                    nontargeted_mmse(tiny_model, x, y, ones, budget)):
            worst = max(worst, float(np.max(np.abs(out.delta - naive.delta))))
    eps_acc = budget.p_max / 128.0
    ok = worst < REDUCTION_ATOL and worst_eps <= eps_acc
    _criterion(3, ok, f"max delta gap {worst:.2e} (tol {REDUCTION_ATOL:.0e}), "
                      f"max eps gap {worst_eps:.2e} with all-ones taps")


def test_criterion_4_pca_oracle():
    rng = np.random.default_rng(404)
    worst = 1.0
    for _ in range(PCA_STACKS):
        rows = int(rng.integers(3, 40))
        dim = int(rng.integers(8, 64))
        m = rng.standard_normal((rows, dim))
        _, v = first_right_singular(m)
        ref = np.linalg.svd(m, full_matrices=False)[2][0]
        worst = min(worst, abs(float(np.dot(v, ref))))
    # rank-1 stacks hand back the row direction itself
    row = rng.standard_normal(32)
    row /= np.linalg.norm(row)
    stack = np.outer(rng.standard_normal(12), row)
    _, v = first_right_singular(stack)
    rank1 = abs(float(np.dot(v, row)))
    ok = worst > PCA_COS and rank1 > 1.0 - 1e-10
    _criterion(4, ok, f"min |cos| vs library svd {1 - worst:.2e} from 1 over "
                      f"{PCA_STACKS} stacks; rank-1 alignment {1 - rank1:.1e}")


def test_criterion_5_budget_safety(tiny_model, tiny_dataset, tiny_eval,
                                   rayleigh_params):
    x_all, y_all = tiny_eval
    train_x, train_y = tiny_dataset.as_arrays("train", math.inf)
    sub = new_model(ArchitectureSpec(p=128, classes=tiny_model.spec.classes,
                                     conv=((8, 5), (4, 3)), dense=(32,),
                                     param_seed=9))
    mmse_cfg = MmseConfig()
    kinds = ("noch", "channel-inversion", "mmse-targeted", "mrpp-targeted",
             "naive-nontargeted", "mmse-nontargeted", "mrpp-nontargeted",
             "limited-channel", "uap-inputs", "uap-limited", "uap-blackbox")
    worst = 0.0

    def crafting_slice(rng):
        idx = rng.integers(0, len(train_x), size=6)
        return CraftingSet(inputs=train_x[idx], labels=train_y[idx])

    for kind in kinds:
        for i in range(BUDGET_INSTANCES):
            rng = derive_rng(5, "budget", kind, i)
            x = x_all[i % len(x_all)]
            y = int(y_all[i % len(y_all)])
            h = sample_channel(rayleigh_params, 128, rng)
            p_max = float(10.0 ** rng.uniform(-2, 2))
            budget = PowerBudget(p_max)
            epochs = int(rng.choice([1, 2, 4]))
            if kind == "noch":
                delta = targeted_noch(tiny_model, x, y, budget).delta
            elif kind == "channel-inversion":
                ref = budget.amplitude * targeted_noch(
                    tiny_model, x, y, budget).direction
                delta = targeted_channel_inversion(ref, h, budget).delta
            elif kind == "mmse-targeted":
                delta = targeted_mmse(tiny_model, x, y, h, budget).delta
            elif kind == "mrpp-targeted":
                delta = targeted_mrpp(tiny_model, x, y, h, budget).delta
            elif kind == "naive-nontargeted":
                delta = nontargeted_naive(tiny_model, x, y, h, budget,
                                          epochs).delta
            elif kind == "mmse-nontargeted":
                delta = nontargeted_mmse(tiny_model, x, y, h, budget, epochs,
                                         mmse_cfg).delta
            elif kind == "mrpp-nontargeted":
                delta = nontargeted_mrpp(tiny_model, x, y, h, budget,
                                         epochs).delta
            elif kind == "limited-channel":
                delta = craft_limited_channel(
                    tiny_model, x, y, rayleigh_params, budget, 3, rng,
                    "mrpp-nontargeted", {"epochs": 1}, False).delta
            elif kind == "uap-inputs":
                delta = craft_uap_inputs(
                    tiny_model, crafting_slice(rng), h, budget,
                    "mrpp-nontargeted", {"epochs": 1}, False).delta
            elif kind == "uap-limited":
                delta = craft_uap_limited(
                    tiny_model, crafting_slice(rng), rayleigh_params, budget,
                    rng, "mrpp-nontargeted", {"epochs": 1}, False).delta
            else:
                delta = craft_uap_blackbox(
                    sub, crafting_slice(rng), rayleigh_params, budget, rng,
                    "mrpp-nontargeted", {"epochs": 1}, False).delta
            power = float(np.sum(np.abs(delta) ** 2))
            worst = max(worst, power / p_max - 1.0)
    ok = worst <= BUDGET_RTOL
    _criterion(5, ok, f"worst power overshoot {worst:.2e} relative over "
                      f"{len(kinds)} kinds x {BUDGET_INSTANCES} instances")


def test_criterion_6_low_pnr_ordering(victim_model, sweep_eval,
                                      rayleigh_params):
    x, y, _ = sweep_eval
    none = _cell(victim_model, x, y, None, rayleigh_params, 0.0)
    noch = _cell(victim_model, x, y, "noch", rayleigh_params, 0.0)
    inv = _cell(victim_model, x, y, "channel-inversion", rayleigh_params, 0.0)
    mrpp = _cell(victim_model, x, y, "mrpp-targeted", rayleigh_params, 0.0)
    ok = (noch >= none - NOCH_DROP
          and inv <= none - ORDER_GAP
          and mrpp <= inv - ORDER_GAP)
    _criterion(6, ok, f"PNR 0 dB: none={none:.3f} noch={noch:.3f} "
                      f"inversion={inv:.3f} targeted-mrpp={mrpp:.3f}")


def test_criterion_7_nontargeted_dominates(victim_model, sweep_eval,
                                           rayleigh_params):
    x, y, _ = sweep_eval
    pnrs = (-10.0, -5.0, 0.0, 5.0, 10.0)
    pairs = []
    ok = True
    for pnr in pnrs:
        t = _cell(victim_model, x, y, "mrpp-targeted", rayleigh_params, pnr)
        nt = _cell(victim_model, x, y, "mrpp-nontargeted", rayleigh_params, pnr)
        ok = ok and nt <= t
        pairs.append(f"{pnr:+.0f}dB nt={nt:.3f} t={t:.3f}")
    _criterion(7, ok, "; ".join(pairs))


def test_criterion_8_universal_orderings(victim_model, substitute_model,
                                         sweep_eval, rayleigh_params):
    x, y, crafting = sweep_eval
    assert len(crafting) == 40
    parts = []
    ok = True
    for pnr in (0.0, 10.0):
        exact = _cell(victim_model, x, y, "uap-inputs", rayleigh_params, pnr,
                      crafting)
        limited = _cell(victim_model, x, y, "uap-limited", rayleigh_params,
                        pnr, crafting)
        bb = _cell(victim_model, x, y, "uap-blackbox", rayleigh_params, pnr,
                   crafting, substitute_model)
        ok = ok and exact <= limited and abs(limited - bb) <= BB_GAP
        parts.append(f"{pnr:.0f}dB exact={exact:.3f} limited={limited:.3f} "
                     f"blackbox={bb:.3f}")
    _criterion(8, ok, "; ".join(parts))


def test_criterion_9_clean_accuracy(victim_model):
    ds = build_dataset(GenerationSpec(
        classes=victim_model.spec.classes, snr_grid_db=(SNR_DB,),
        per_class_per_snr=250, seed=78, train_frac=0.5))
    x, y = ds.as_arrays("test", SNR_DB)
    acc = victim_model.accuracy(x, y)
    _criterion(9, acc >= CLEAN_BAR,
               f"clean accuracy {acc:.3f} on {len(x)} fresh samples at "
               f"SNR {SNR_DB:.0f} dB (bar {CLEAN_BAR:.2f})")


def test_criterion_10_golden_determinism(tmp_path):
    golden = os.path.join(os.path.dirname(__file__), "data", "golden")
    cfg = load_sweep_config(os.path.join(golden, "sweep.json"))
    rows = sweep_from_config(cfg)
    out = tmp_path / "fresh.csv"
    write_sweep_csv(out, rows)
    want = open(os.path.join(golden, "golden.csv"), "rb").read()
    ok = out.read_bytes() == want
    _criterion(10, ok, f"sweep of {len(rows)} cells reproduces the pinned "
                       f"CSV byte-for-byte" if ok else
                       "regenerated CSV differs from the pinned bytes")


def test_gradient_direction_sanity(tiny_model, tiny_eval):
    """fgm directions are unit-norm; cheap guard that criterion 1 exercises
    the same gradient the attacks consume."""
    x, y = tiny_eval
    d, n = fgm_gradient(tiny_model, x[0], int(y[0]))
    assert abs(np.linalg.norm(d) - 1.0) < 1e-12
    assert n > 0
