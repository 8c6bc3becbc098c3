import json
import os
import subprocess

import pytest

import edgefed


def test_topology():
    assert edgefed.generate_topology(2) == (1, 1)
    assert edgefed.generate_topology(30) == (24, 6)
    assert edgefed.generate_topology(7) == (6, 1)
    with pytest.raises(edgefed.ConfigInvalid):
        edgefed.generate_topology(1)


def test_finality_delay():
    assert edgefed.finality_delay("clique", 4) == 0.0
    assert edgefed.finality_delay("qbft", 4) == pytest.approx(0.25)


def test_run_scenario_baseline():
    out = edgefed.run_scenario({"scenario_id": "py", "runs": 3, "seed": 5})
    assert len(out["traces"]) == 3
    assert out["funds_conserved"]
    assert out["settled"] == 3
    stats = edgefed.aggregate(out["traces"])
    assert stats["n_samples"] == 3
    assert abs(stats["total_s"]["mean"] - 18.0) <= 3.0
    seg = edgefed.decompose(out["traces"][0])
    parts = ["bidding_s", "winner_selection_s", "info_exchange_s", "deployment_s", "confirmation_s"]
    assert sum(seg[k] for k in parts) == pytest.approx(seg["total_s"])


def test_run_scenario_is_deterministic():
    cfg = {"topology": {"n_systems": 10}, "consensus": {"algorithm": "qbft"}, "runs": 2, "seed": 9}
    assert edgefed.run_scenario(cfg) == edgefed.run_scenario(json.dumps(cfg))


def test_invalid_config():
    with pytest.raises(edgefed.ConfigInvalid):
        edgefed.run_scenario({"unknown": 1})


def test_aggregate_population_variance():
    traces = [
        {"announce_submitted": 0, "second_bid_finalized": 0, "winner_finalized": 0,
         "deployment_started": 0, "confirm_finalized": 0, "established": t}
        for t in (10.0, 20.0)
    ]
    stats = edgefed.aggregate(traces)
    assert stats["total_s"]["mean"] == pytest.approx(15.0)
    assert stats["total_s"]["variance"] == pytest.approx(25.0)


def test_contract_workflow():
    c = edgefed.Contract({"c": "100", "p1": "100", "p2": "100"}, oracles=["o"])
    for name in ("c", "p1", "p2"):
        c.register_operator(name, "mec-" + name)
    ann = c.announce_service("c", "app", "10")
    c.place_bid("p1", ann, "0.20")
    c.place_bid("p2", ann, "0.15")
    assert c.choose_provider("c", ann) == edgefed.address("p2")
    with pytest.raises(ValueError, match="NotWinner"):
        c.confirm_deployment("p1", ann, "10.0.0.2")
    c.confirm_deployment("p2", ann, "10.0.0.2", 4789, 42)
    c.close_federation("c", ann)
    settled = c.report_qos("o", ann, 0.95, 20.0)
    assert settled["sla_violated"]
    assert settled["provider_payment"] == "8.000000"
    assert c.phase(ann) == "Settled"
    assert c.total_funds() == "300.000000"


@pytest.mark.skipif("EDGEFED_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_validate(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario_id": "x", "runs": 1}))
    r = subprocess.run([os.environ["EDGEFED_CLI"], "validate-config", "--config", str(cfg)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    r = subprocess.run([os.environ["EDGEFED_CLI"], "run", "--config", str(tmp_path / "missing.json")],
                       capture_output=True, text=True)
    assert r.returncode == 1
