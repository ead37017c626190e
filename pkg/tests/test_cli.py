import json

import pytest

from hypersync import presets
from hypersync.cli import EXIT_OK, EXIT_USAGE, EXIT_VERDICT, ExperimentConfig, ConfigError, main
from hypersync.network import load_network, validate


def sweep_config(tmp_path, **extra):
    doc = {
        "network": "example1",
        "responses": {"x": "example1.G", "y": {"linear_F": [-5, -10, 12, 14]}},
        "sweep": {"lam_min": 0.001, "lam_max": 0.02, "count": 6, "spacing": "log",
                  "initial": list(presets.P5), "horizon": 2000.0},
        "seed": 7,
    }
    doc.update(extra)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_tower_rejects_zero_layers(capsys):
    assert main(["run-tower", "0"]) == EXIT_USAGE


def test_verify_factorization(capsys):
    assert main(["verify-factorization", "--k", "1"]) == EXIT_USAGE
    assert main(["verify-factorization", "--k", "3", "--points", "200"]) == EXIT_OK
    assert "pass" in capsys.readouterr().out


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    path = sweep_config(tmp_path, colour="blue")
    assert main(["sweep", "--config", str(path)]) == EXIT_USAGE
    assert "colour" in capsys.readouterr().err


def test_unknown_sweep_key_rejected():
    doc = json.loads('{"network": "example1", "responses": {}, "sweep": {"lam_min": 0, "lam_max": 1, '
                     '"count": 3, "initial": [0], "tolerance": 1}}')
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(doc)


def test_sweep_is_bit_reproducible(tmp_path, capsys):
    path = sweep_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--config", str(path), "--out-dir", str(a), "--format", "csv"]) == EXIT_OK
    assert main(["--out-dir", str(b), "--format", "csv", "sweep", "--config", str(path)]) == EXIT_OK
    assert (a / "branch.csv").read_bytes() == (b / "branch.csv").read_bytes()
    assert not (a / "branch.svg").exists()


def test_sweep_svg_has_csv_companion(tmp_path, capsys):
    path = sweep_config(tmp_path)
    assert main(["sweep", "--config", str(path), "--out-dir", str(tmp_path / "o")]) == EXIT_OK
    assert (tmp_path / "o" / "branch.svg").exists() and (tmp_path / "o" / "branch.csv").exists()


def test_sweep_initial_length_checked(tmp_path, capsys):
    doc = json.loads(sweep_config(tmp_path).read_text())
    doc["sweep"]["initial"] = [0.1, 0.2]
    path = tmp_path / "short.json"
    path.write_text(json.dumps(doc))
    assert main(["sweep", "--config", str(path)]) == EXIT_USAGE


def test_check_synchrony_example1(tmp_path, capsys):
    assert main(["check-synchrony", "example1", "--samples", "8", "--out-dir", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "4 nontrivial robust partition(s)" in out
    rows = (tmp_path / "synchrony.csv").read_text().splitlines()
    assert rows[0] == "partition,robust,max_violation"
    assert len(rows) == 1 + 10


def test_check_synchrony_unknown_source():
    assert main(["check-synchrony", "no-such-network"]) == EXIT_USAGE


def test_augment_command(tmp_path, capsys):
    core = tmp_path / "core.json"
    core.write_text(presets.network("example3.core").to_json())
    assert main(["augment", str(core), "--out-dir", str(tmp_path)]) == EXIT_OK
    aug = load_network(tmp_path / "core_augmented.json")
    assert validate(aug).ok and aug.n == 5
    ref = presets.network("example3")
    assert len(aug.edges) == len(ref.edges)
    assert sorted((e.perm, e.source) for e in aug.edges if e.perm) == \
        sorted((e.perm, e.source) for e in ref.edges if e.perm)


def test_augment_rejects_bad_choice(tmp_path, capsys):
    core = tmp_path / "core.json"
    core.write_text(presets.network("example1.core").to_json())
    assert main(["augment", str(core), "--chosen", "x0", "x1"]) == EXIT_USAGE


def test_argparse_errors_exit_with_usage_code():
    with pytest.raises(SystemExit) as exc:
        main(["run-example", "9"])
    assert exc.value.code == EXIT_USAGE


def test_verdict_code_is_distinct():
    assert EXIT_VERDICT == 1
