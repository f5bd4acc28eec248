import math

import numpy as np
import pytest

from rfadv.attacks import PowerBudget, nontargeted_mrpp
from rfadv.channel import ChannelModelParams, ChannelRealization, sample_channel
from rfadv.errors import ConfigurationError, RfadvError
from rfadv.numerics import derive_rng
from rfadv.universal import (CraftingSet, UapPerturbation, choose_sign,
                             craft_limited_channel, craft_uap_blackbox,
                             craft_uap_inputs, craft_uap_limited)

BUDGET = PowerBudget(2.0)
PARAMS = ChannelModelParams()


def _crafting(x_all, y_all, n=8):
    return CraftingSet(inputs=x_all[:n], labels=y_all[:n])


class TestCraftingSet:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            CraftingSet(inputs=np.zeros((3, 8), complex), labels=np.zeros(2))
        with pytest.raises(ConfigurationError):
            CraftingSet(inputs=np.zeros((0, 8), complex), labels=np.zeros(0))

    def test_len(self, tiny_eval):
        x_all, y_all = tiny_eval
        assert len(_crafting(x_all, y_all, 5)) == 5


class TestChooseSign:
    def test_oracle_brute_force(self, tiny_model, tiny_eval):
        """choose_sign must agree with directly evaluating both orientations."""
        x_all, y_all = tiny_eval
        rng = derive_rng(1, "cs")
        for t in range(5):
            d = rng.standard_normal(128) + 1j * rng.standard_normal(128)
            d /= np.linalg.norm(d)
            scen = [(x_all[i], int(y_all[i]),
                     sample_channel(PARAMS, 128, derive_rng(10 + t, "h", i)))
                    for i in range(4)]
            got = choose_sign(tiny_model, d, BUDGET, scen)
            amp = BUDGET.amplitude
            lp = np.mean([tiny_model.loss(x + h.taps * (amp * d), y)
                          for x, y, h in scen])
            lm = np.mean([tiny_model.loss(x - h.taps * (amp * d), y)
                          for x, y, h in scen])
            assert got == (1 if lp >= lm else -1)

    def test_empty_scenarios_rejected(self, tiny_model):
        with pytest.raises(ConfigurationError):
            choose_sign(tiny_model, np.ones(128, complex), BUDGET, [])


class TestLimitedChannel:
    def test_budget_and_shape(self, tiny_model, tiny_eval):
        x_all, y_all = tiny_eval
        out = craft_limited_channel(tiny_model, x_all[0], int(y_all[0]),
                                    PARAMS, BUDGET, 6, derive_rng(2, "lc"))
        assert out.delta.shape == (128,)
        power = float(np.sum(np.abs(out.delta) ** 2))
        assert abs(power - BUDGET.p_max) < 1e-9 * BUDGET.p_max
        assert out.kind == "limited-channel"
        assert out.rows_used == 6 and out.rows_failed == 0

    def test_deterministic(self, tiny_model, tiny_eval):
        x_all, y_all = tiny_eval
        a = craft_limited_channel(tiny_model, x_all[0], int(y_all[0]), PARAMS,
                                  BUDGET, 5, derive_rng(3, "lc"))
        b = craft_limited_channel(tiny_model, x_all[0], int(y_all[0]), PARAMS,
                                  BUDGET, 5, derive_rng(3, "lc"))
        assert np.array_equal(a.delta, b.delta)
        assert a.sign == b.sign

    def test_too_few_channels(self, tiny_model, tiny_eval):
        x_all, y_all = tiny_eval
        with pytest.raises(ConfigurationError):
            craft_limited_channel(tiny_model, x_all[0], int(y_all[0]), PARAMS,
                                  BUDGET, 1, derive_rng(4, "lc"))

    def test_unknown_inner_rejected(self, tiny_model, tiny_eval):
        x_all, y_all = tiny_eval
        with pytest.raises(ConfigurationError):
            craft_limited_channel(tiny_model, x_all[0], int(y_all[0]), PARAMS,
                                  BUDGET, 4, derive_rng(5, "lc"),
                                  inner="gradient-descent")


class TestUapInputs:
    def test_identical_rows_recover_common_direction(self, tiny_model,
                                                     tiny_eval):
        """If every scenario produces the same white-box row, the rank-1
        stack's principal direction IS that row (up to the resolved sign)."""
        x_all, y_all = tiny_eval
        h = ChannelRealization.identity(128)
        same = CraftingSet(inputs=np.tile(x_all[0], (4, 1)),
                           labels=np.full(4, int(y_all[0])))
        out = craft_uap_inputs(tiny_model, same, h, BUDGET)
        row = nontargeted_mrpp(tiny_model, x_all[0], int(y_all[0]), h, BUDGET,
                               epochs=1).delta
        row = row / np.linalg.norm(row) * BUDGET.amplitude
        agree = min(np.linalg.norm(out.delta - row),
                    np.linalg.norm(out.delta + row))
        assert agree < 1e-6

    def test_budget_and_meta(self, tiny_model, tiny_eval):
        x_all, y_all = tiny_eval
        h = sample_channel(PARAMS, 128, derive_rng(6, "h"))
        out = craft_uap_inputs(tiny_model, _crafting(x_all, y_all), h, BUDGET)
        assert abs(float(np.sum(np.abs(out.delta) ** 2)) - BUDGET.p_max) < 1e-9 * BUDGET.p_max
        assert out.meta["n_inputs"] == 8
        assert out.sign in (-1, 1)

    def test_needs_two_inputs(self, tiny_model, tiny_eval):
        x_all, y_all = tiny_eval
        h = ChannelRealization.identity(128)
        with pytest.raises(ConfigurationError):
            craft_uap_inputs(tiny_model, _crafting(x_all, y_all, 1), h, BUDGET)


class TestUapLimitedAndBlackbox:
    def test_blackbox_equals_limited_on_substitute(self, tiny_model, tiny_eval):
        """uap-blackbox IS uap-limited run on the substitute; identical
        arithmetic, different bookkeeping."""
        x_all, y_all = tiny_eval
        cs = _crafting(x_all, y_all, 6)
        a = craft_uap_limited(tiny_model, cs, PARAMS, BUDGET,
                              derive_rng(7, "u"))
        b = craft_uap_blackbox(tiny_model, cs, PARAMS, BUDGET,
                               derive_rng(7, "u"))
        assert np.array_equal(a.delta, b.delta)
        assert b.kind == "uap-blackbox"
        assert b.meta["substitute"] is True

    def test_pairing_distinct_channels(self, tiny_model, tiny_eval):
        """Each crafting input gets its own channel draw: a different rng
        stream must change the result."""
        x_all, y_all = tiny_eval
        cs = _crafting(x_all, y_all, 6)
        a = craft_uap_limited(tiny_model, cs, PARAMS, BUDGET, derive_rng(8, "u"))
        b = craft_uap_limited(tiny_model, cs, PARAMS, BUDGET, derive_rng(9, "u"))
        assert not np.array_equal(a.delta, b.delta)


class TestUapEffectiveness:
    def test_uap_fools_more_than_noise(self, tiny_model, tiny_eval):
        """The crafted universal direction must beat an equal-power random
        perturbation at dropping accuracy through fresh channels."""
        x_all, y_all = tiny_eval
        budget = PowerBudget(30.0)
        cs = _crafting(x_all, y_all, 16)
        uap = craft_uap_limited(tiny_model, cs, PARAMS, budget,
                                derive_rng(10, "u"))
        rng = derive_rng(11, "eval")
        rnd = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        rnd *= budget.amplitude / np.linalg.norm(rnd)
        acc_uap = acc_rnd = 0
        trials = 200
        for t in range(trials):
            i = t % len(x_all)
            h = sample_channel(PARAMS, 128, derive_rng(12, "h", t))
            acc_uap += tiny_model.predict_index(x_all[i] + h.taps * uap.delta) == y_all[i]
            acc_rnd += tiny_model.predict_index(x_all[i] + h.taps * rnd) == y_all[i]
        assert acc_uap < acc_rnd


class TestUapPerturbationType:
    def test_off_sphere_rejected(self):
        with pytest.raises(RfadvError):
            UapPerturbation(delta=np.ones(4, complex) * 0.1, kind="x",
                            budget=PowerBudget(1.0), sign=1, sigma1=1.0,
                            rows_used=2, rows_failed=0)

    def test_report_is_json_ready(self, tiny_model, tiny_eval):
        import json
        x_all, y_all = tiny_eval
        out = craft_limited_channel(tiny_model, x_all[0], int(y_all[0]),
                                    PARAMS, BUDGET, 4, derive_rng(13, "lc"))
        json.dumps(out.report())
