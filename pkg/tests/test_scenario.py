"""Strict config parsing, the materialized echo, and the command line."""

import json

import pytest

from qoetrust.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from qoetrust.errors import ConfigError
from qoetrust.evidence import AppContext
from qoetrust.runner import run
from qoetrust.scenario import load_config, parse_config

MINIMAL = {
    "peers": {"honest": 1},
    "networks": [{"id": "net-a"}],
    "rounds": 1,
}


def full_config():
    return {
        "peers": {"honest": 3, "attacker": 1, "support": 1, "taste_sigma": 0.02},
        "networks": [
            {"id": "net-a", "claimed_name": "Alpha", "provider_id": "prov-1",
             "cost": 0.2, "true_quality": 0.8},
            {"id": "net-b", "claimed_name": "Beta",
             "schedule": {"q_build": 0.9, "q_betray": 0.1, "switch_round": 5}},
        ],
        "rounds": 8,
        "seed": 42,
        "topology": "ring",
        "metric_params": {"half_life": 10, "rec_prior_pos": 1.0,
                          "rec_prior_neg": 3.0, "sybil_cap": 4.0,
                          "confidence_floor": 0.2},
        "risk_table": {"browsing": 0.2, "gaming": 0.4, "streaming": 0.5,
                       "banking": 0.9},
        "lambda": 0.1,
        "p_mislead": 0.25,
        "noise_sigma": 0.04,
        "contexts": ["browsing", "banking"],
        "fanout": 2,
        "max_hops": 1,
        "store_capacity": 5000,
        "friends": {"h-000": {"h-001": 1.0, "h-002": 0.5}},
        "attacks": [
            {"kind": "sybil_flood", "count": 5, "target": "net-a", "rating": 1.0},
            {"kind": "ssid_spoof", "network": "net-a", "imitate": "Beta"},
        ],
    }


class TestParsing:
    def test_minimal_config_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.peers.honest == 1
        assert cfg.seed == 0
        assert cfg.topology == "complete"
        assert cfg.metric_params.half_life == 20
        assert cfg.metric_params.sybil_cap == 5.0
        assert cfg.contexts == (AppContext.BROWSING,)
        assert cfg.fanout == 1
        assert dict(cfg.risk_table)["banking"] == 0.8
        assert cfg.friends is None
        assert cfg.attacks == ()

    def test_unknown_top_level_key(self):
        bad = dict(MINIMAL, peerz=1)
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "peerz" in str(err.value)

    def test_missing_required_key(self):
        bad = {"peers": {"honest": 1}, "networks": [{"id": "n"}]}
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "rounds" in str(err.value)

    def test_error_names_the_path(self):
        bad = dict(MINIMAL, noise_sigma=2.0)
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "noise_sigma" in str(err.value)

    def test_bool_is_not_an_int(self):
        bad = dict(MINIMAL, rounds=True)
        with pytest.raises(ConfigError):
            parse_config(bad)

    def test_duplicate_network_id(self):
        bad = dict(MINIMAL, networks=[{"id": "n"}, {"id": "n"}])
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "duplicate" in str(err.value)

    def test_quality_and_schedule_conflict(self):
        bad = dict(
            MINIMAL,
            networks=[{
                "id": "n", "true_quality": 0.5,
                "schedule": {"q_build": 0.9, "q_betray": 0.1, "switch_round": 3},
            }],
        )
        with pytest.raises(ConfigError):
            parse_config(bad)

    def test_risk_table_must_cover_every_context(self):
        bad = dict(MINIMAL, risk_table={"browsing": 0.3, "gaming": 0.5,
                                        "streaming": 0.5})
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "banking" in str(err.value)

    def test_attack_dangling_network_ref(self):
        bad = dict(
            MINIMAL,
            attacks=[{"kind": "sybil_flood", "count": 5, "target": "net-ghost"}],
        )
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "net-ghost" in str(err.value)

    def test_attack_dangling_peer_ref(self):
        bad = dict(
            MINIMAL,
            attacks=[{"kind": "compromise", "target": "net-a",
                      "victims": ["h-999"]}],
        )
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "h-999" in str(err.value)

    def test_attack_unknown_param(self):
        bad = dict(
            MINIMAL,
            attacks=[{"kind": "sybil_flood", "count": 5, "target": "net-a",
                      "stealth": True}],
        )
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert "stealth" in str(err.value)

    def test_ssid_spoof_needs_existing_claimed_name(self):
        bad = dict(
            MINIMAL,
            networks=[{"id": "net-a"}, {"id": "net-b"}],
            attacks=[{"kind": "ssid_spoof", "network": "net-a",
                      "imitate": "NobodyTel"}],
        )
        with pytest.raises(ConfigError):
            parse_config(bad)

    def test_whitewash_attack_conflicts_with_inline_schedule(self):
        bad = dict(
            MINIMAL,
            networks=[{"id": "net-a",
                       "schedule": {"q_build": 0.9, "q_betray": 0.1,
                                    "switch_round": 3}}],
            attacks=[{"kind": "whitewash_network", "network": "net-a",
                      "switch_round": 5}],
        )
        with pytest.raises(ConfigError):
            parse_config(bad)

    def test_topology_edge_validation(self):
        with pytest.raises(ConfigError):
            parse_config(dict(MINIMAL, topology={"edges": [["h-000", "h-000"]]}))
        with pytest.raises(ConfigError) as err:
            parse_config(dict(MINIMAL, topology={"edges": [["h-000", "h-777"]]}))
        assert "h-777" in str(err.value)

    def test_friends_validation(self):
        with pytest.raises(ConfigError):
            parse_config(dict(MINIMAL, friends={"h-000": {"h-000": 1.0}}))
        with pytest.raises(ConfigError):
            parse_config(dict(MINIMAL, friends={"h-404": {}}))
        with pytest.raises(ConfigError):
            parse_config(dict(MINIMAL, friends="best_effort"))
        cfg = parse_config(dict(MINIMAL, friends="honest_clique"))
        assert cfg.friends == "honest_clique"

    def test_contexts_must_be_known(self):
        with pytest.raises(ConfigError) as err:
            parse_config(dict(MINIMAL, contexts=["browsing", "karaoke"]))
        assert "karaoke" in str(err.value)

    def test_peer_id_scheme(self):
        cfg = parse_config(
            {"peers": {"honest": 2, "attacker": 1, "support": 1},
             "networks": [{"id": "n"}], "rounds": 1}
        )
        assert cfg.peer_ids() == ["a-000", "h-000", "h-001", "s-000"]


class TestEcho:
    def test_round_trip_minimal(self):
        cfg = parse_config(MINIMAL)
        assert parse_config(cfg.to_json_dict()) == cfg

    def test_round_trip_full(self):
        cfg = parse_config(full_config())
        echo = cfg.to_json_dict()
        assert parse_config(echo) == cfg
        # the echo is valid JSON end to end
        assert parse_config(json.loads(json.dumps(echo))) == cfg

    def test_echo_materializes_defaults(self):
        echo = parse_config(MINIMAL).to_json_dict()
        assert echo["seed"] == 0
        assert echo["metric_params"]["sybil_cap"] == 5.0
        assert echo["risk_table"]["banking"] == 0.8
        assert echo["topology"] == "complete"


class TestRunnerLevel:
    def test_zero_rounds(self):
        series = run(parse_config(dict(MINIMAL, rounds=0)))
        assert series.per_round == []
        assert series.summary["rounds"] == 0
        assert series.summary["attacker_selection_fraction"] == 0.0
        assert series.summary["convergence_round"] is None
        assert series.summary["rejected_spoofs_total"] == 0
        assert series.summary["evidence_availability"] == 1.0
        assert series.summary["mean_misprediction_rate"] == 0.0

    def test_seed_override_changes_draws(self):
        cfg = parse_config(dict(MINIMAL, peers={"honest": 2}, rounds=3))
        a = run(cfg, seed_override=1).per_round
        b = run(cfg, seed_override=2).per_round
        assert [r["qoe"] for r in a] != [r["qoe"] for r in b]


class TestCli:
    def _write(self, tmp_path, obj, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    def test_run_to_stdout(self, tmp_path, capsys):
        path = self._write(tmp_path, dict(MINIMAL, rounds=3))
        assert main(["run", path]) == EXIT_OK
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 4  # 3 rounds + summary
        rows = [json.loads(line) for line in lines]
        assert [r["round"] for r in rows[:3]] == [0, 1, 2]
        assert rows[3]["rounds"] == 3

    def test_run_to_file(self, tmp_path):
        path = self._write(tmp_path, dict(MINIMAL, rounds=2))
        out = tmp_path / "metrics.jsonl"
        assert main(["run", path, "--out", str(out)]) == EXIT_OK
        assert len(out.read_text().strip().split("\n")) == 3

    def test_summary_format(self, tmp_path, capsys):
        path = self._write(tmp_path, MINIMAL)
        assert main(["run", path, "--format", "summary_json"]) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["rounds"] == 1

    def test_seed_flag_beats_config(self, tmp_path, capsys):
        cfg = dict(MINIMAL, peers={"honest": 2}, rounds=3, seed=1)
        path = self._write(tmp_path, cfg)
        main(["run", path])
        with_config_seed = capsys.readouterr().out
        main(["run", path, "--seed", "1"])
        same = capsys.readouterr().out
        main(["run", path, "--seed", "9"])
        overridden = capsys.readouterr().out
        assert with_config_seed == same
        assert overridden != with_config_seed

    def test_sweep(self, tmp_path, capsys):
        path = self._write(tmp_path, dict(MINIMAL, rounds=2))
        assert main(["sweep", path, "--seeds", "0,1,2"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().split("\n")
        assert [json.loads(l)["seed"] for l in lines] == [0, 1, 2]

    def test_sweep_range(self, tmp_path, capsys):
        path = self._write(tmp_path, dict(MINIMAL, rounds=1))
        assert main(["sweep", path, "--seeds", "3:6"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().split("\n")
        assert [json.loads(l)["seed"] for l in lines] == [3, 4, 5]

    def test_sweep_bad_seeds(self, tmp_path, capsys):
        path = self._write(tmp_path, MINIMAL)
        assert main(["sweep", path, "--seeds", "abc"]) == EXIT_CONFIG

    def test_validate_echo_parses_back(self, tmp_path, capsys):
        path = self._write(tmp_path, full_config())
        assert main(["validate", path]) == EXIT_OK
        echo = json.loads(capsys.readouterr().out)
        assert parse_config(echo) == load_config(path)

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = self._write(tmp_path, dict(MINIMAL, peerz=1))
        assert main(["run", path]) == EXIT_CONFIG
        assert "peerz" in capsys.readouterr().err

    def test_bad_json_exit_code(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        assert main(["run", str(path)]) == EXIT_CONFIG

    def test_missing_file_exit_code(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "ghost.json")]) == EXIT_IO

    def test_unwritable_out_exit_code(self, tmp_path, capsys):
        path = self._write(tmp_path, MINIMAL)
        out = tmp_path / "no" / "such" / "dir" / "metrics.jsonl"
        assert main(["run", path, "--out", str(out)]) == EXIT_IO
