import math

import numpy as np
import pytest

from cvbell.bell import chsh_form, correlation_tensor, zb_lhs
from cvbell.core import SqueezedParams
from cvbell.optimizer import (
    OptimizerConfig,
    ghz_zb_max,
    make_objective,
    me_threshold,
    optimize_bell,
    optimize_r_profile,
    visibility_row,
)

FAST = OptimizerConfig(restarts=6, seed=3)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(tolerance=0.0)


def test_objective_factory():
    assert make_objective(3, "zb").bound == 8
    assert make_objective(4, "mermin4").bound == 4
    with pytest.raises(ValueError):
        make_objective(3, "mermin4")
    with pytest.raises(ValueError):
        make_objective(3, "nope")


def test_reproducible():
    p = SqueezedParams(3, 0.0)
    a = optimize_bell(p, "mermin3", FAST, r_free=True)
    b = optimize_bell(p, "mermin3", FAST, r_free=True)
    assert a.best_value == b.best_value
    assert a.restart_statistics == b.restart_statistics
    np.testing.assert_array_equal(a.best_settings.settings, b.best_settings.settings)
    assert a.best_r == b.best_r


def test_parallel_matches_serial():
    p = SqueezedParams(2, -1.0)
    serial = optimize_bell(p, "zb", OptimizerConfig(restarts=4, seed=1, threads=1))
    parallel = optimize_bell(p, "zb", OptimizerConfig(restarts=4, seed=1, threads=2))
    assert serial.restart_statistics == parallel.restart_statistics


def test_result_invariants():
    p = SqueezedParams(4, -0.8)
    res = optimize_bell(p, "zb", FAST)
    assert res.best_value == max(res.restart_statistics)
    again = zb_lhs(correlation_tensor(SqueezedParams(4, res.best_r), res.best_settings)).lhs
    assert again == pytest.approx(res.best_value, abs=1e-12)
    assert res.best_value <= 4**4
    assert res.best_r == -0.8 and not res.r_at_bound


@pytest.mark.parametrize("n,form", [(2, "zb"), (3, "mermin3"), (3, "zb"), (4, "mermin4")])
def test_vacuum_never_violates(n, form):
    res = optimize_bell(SqueezedParams(n, 0.0), form, FAST)
    assert res.best_value <= res.bound + 1e-9


def test_vacuum_tensor_is_local(rng):
    """At r = 0 the tensor factorises into local means, i.e. it is an LHV model."""
    n = 4
    s = rng.normal(size=(n, 2)) * 0.5 + 1j * rng.normal(size=(n, 2)) * 0.5
    from cvbell.core import SettingTable, setting_bits

    t = correlation_tensor(SqueezedParams(n, 0.0), SettingTable(s))
    local = np.exp(-2 * np.abs(s) ** 2)
    bits = setting_bits(n)
    np.testing.assert_allclose(t.values, np.prod(local[np.arange(n)[None, :], bits], axis=1), rtol=1e-14)
    # independent +-1 outcomes with these means give exactly this tensor
    assert zb_lhs(t).lhs <= 2**n + 1e-12


def test_mermin3_free_r_reaches_three():
    res = optimize_bell(SqueezedParams(3, 0.0), "mermin3", OptimizerConfig(restarts=8, seed=0), r_free=True)
    assert res.best_value >= 3 - 1e-4
    assert res.r_at_bound and res.best_r < 0


def test_r_profile_three_modes_approaches_three():
    profile = optimize_r_profile(3, "mermin3", [-0.5, -1.0, -2.0, -3.0], OptimizerConfig(restarts=6, seed=2))
    values = [v for _, v in profile]
    assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(3.0, abs=1e-3)
    assert values[0] > 2.0


def test_r_profile_empty_grid():
    with pytest.raises(ValueError):
        optimize_r_profile(3, "mermin3", [])


def test_r_profile_two_modes_unsqueezed():
    [(r, value)] = optimize_r_profile(2, chsh_form(), [0.0], FAST)
    assert r == 0.0 and value == pytest.approx(2.0, abs=1e-9)


def test_two_mode_chsh_restricted_family():
    """One setting per party pinned at the origin recovers the 2.19 two-mode optimum."""
    cfg = OptimizerConfig(restarts=8, seed=0, anchor_first_setting=True)
    res = optimize_bell(SqueezedParams(2, -5.0), chsh_form(), cfg)
    assert res.best_value == pytest.approx(2.19, abs=5e-3)
    np.testing.assert_array_equal(res.best_settings.settings[:, 0], [0, 0])
    # the unrestricted search does better
    free = optimize_bell(SqueezedParams(2, -5.0), chsh_form(), OptimizerConfig(restarts=8, seed=0))
    assert free.best_value > res.best_value + 0.1


def test_restricted_family_closed_form():
    # settings (0, t) and (0, -t) at infinite squeezing: 1 + 2 e^{-t^2} - e^{-4 t^2}, optimum at t^2 = ln2 / 3
    t2 = math.log(2) / 3
    assert 1 + 2 * math.exp(-t2) - math.exp(-4 * t2) == pytest.approx(2.1905, abs=1e-4)


def test_complex_search_runs():
    cfg = OptimizerConfig(restarts=3, seed=0, real_only=False)
    res = optimize_bell(SqueezedParams(2, -1.0), "zb", cfg)
    assert np.iscomplexobj(res.best_settings.settings)
    assert res.best_value > 4.0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ghz_threshold_small_n(n):
    assert 2**n / ghz_zb_max(n) == pytest.approx(me_threshold(n), abs=2e-3)


def test_visibility_row_small():
    row = visibility_row(3, OptimizerConfig(restarts=8, seed=0))
    assert set(row.candidates) == {"zb", "mermin3"}
    assert row.v_osc == pytest.approx(2 / 3, abs=5e-3)
    assert row.v_me == 0.5
    assert row.v_osc > row.v_me
    with pytest.raises(ValueError):
        visibility_row(1)


def test_to_json_roundtrip():
    res = optimize_bell(SqueezedParams(2, -1.0), "zb", OptimizerConfig(restarts=2, seed=0))
    body = res.to_json()
    assert body["objective"] == "zb" and len(body["restart_values"]) == 2
    assert len(body["settings"]) == 2 and len(body["settings"][0]) == 2
