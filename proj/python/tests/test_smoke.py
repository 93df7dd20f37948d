# SPDX-License-Identifier: Apache-2.0
import json
import math

import pytest

import tandem_tail as tt


def set_a():
    return tt.ModelParams([1.0, 0.5, 0.5], [2.0, 3.0, 4.0], [1.0, 1.0, 1.0])


def quick(manifest):
    for a in ("sim.horizon=300", "sim.burn_in=20", "sim.replicas=2", "sim.batch_time=20",
              "sim.threads=1", "fit.gumbel_block_time=5", "fit.gumbel_blocks=20"):
        manifest.set(a)
    return manifest


def test_validate_and_errors():
    d = tt.validate(set_a())
    assert d["refined_stable"]
    assert d["drift"] == pytest.approx([-1.0, -0.5, -0.5])
    bad = set_a()
    bad.c = [2.0, 3.0, 3.4]
    with pytest.raises(tt.UnstableModel, match="lambda3 \\+ c2 < c3"):
        tt.validate(bad)
    assert issubclass(tt.UnstableModel, tt.Error)


def test_analyze_set_a():
    r = tt.analyze(set_a())
    node3 = r.marginals[2]
    assert node3.regime == tt.Regime.BranchPoint
    assert node3.mu == -1.5
    assert r.geometry.z_max == pytest.approx((1 + math.sqrt(6)) / 2, rel=1e-12)
    assert r.geometry.z_star is None
    assert r.regulator_rates == pytest.approx([1.0, 1.5, 2.0])
    doc = json.loads(r.to_json("abc"))
    assert doc["schema_version"] == 1


def test_analyze_set_b_simple_pole():
    m = tt.RunManifest.set_b()
    r = tt.analyze(m.model)
    assert r.marginals[2].regime == tt.Regime.SimplePole
    assert r.geometry.z_star == pytest.approx(13 / 35, rel=1e-10)
    assert tt.tauberian_exponent(tt.Regime.PoleAtBranch) == (0.5, -0.5)


def test_manifest_round_trip():
    m = tt.RunManifest.set_a()
    again = tt.RunManifest.parse(m.to_text())
    assert again == m
    assert again.hash == m.hash and len(m.hash) == 16
    m.set("sim.seed=99")
    assert m.hash != again.hash
    with pytest.raises(tt.ConfigError):
        m.set("sim.nope=1")


def test_simulate_and_evaluate():
    m = quick(tt.RunManifest.set_a())
    p = tt.simulate(m, gumbel=True)
    levels, probs = p.ccdf(1)
    assert probs[0] == 1.0
    assert all(a >= b for a, b in zip(probs, probs[1:]))
    assert len(p.regulator_rates) == 3
    rep = tt.evaluate(p)
    assert rep.find("kernel.z_max_closed_form").passed
    assert rep.find("nothing") is None
    assert rep.to_csv().startswith("# manifest_hash=" + m.hash)
    neg = tt.evaluate(p, alpha3_scale=2.0)
    assert not neg.find("decay_rate.alpha3").passed
    assert not neg.all_pass()
    # Same manifest, same bytes.
    assert tt.simulate(m, gumbel=True).simulation_json() == p.simulation_json()
