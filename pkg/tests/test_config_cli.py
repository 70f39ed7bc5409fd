"""Config loading, digests, CLI exit codes, and output determinism."""

import filecmp

import pytest

from automeasure.cli import main
from automeasure.config import ExperimentConfig, config_digest, load_config
from automeasure.measure import GridMeasure

GOLDEN_OFFSET = 0.6180339887498949


def write_config(tmp_path, name="exp.toml", **fields):
    lines = []
    for key, value in fields.items():
        if isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        elif isinstance(value, (list, tuple)):
            lines.append(f"{key} = {list(value)!r}")
        else:
            lines.append(f"{key} = {value!r}")
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return str(path)


# ---------------------------------------------------------------------------
# ExperimentConfig


def test_defaults_are_valid():
    config = ExperimentConfig()
    assert config.N == 2 ** 14
    assert config.map().offset == 0.0
    assert config.family().sin_profile == (1.0,)
    assert config.target_alpha().quotients[0] == 0


def test_validation_errors():
    with pytest.raises(ValueError):
        ExperimentConfig(N=1000)
    with pytest.raises(ValueError):
        ExperimentConfig(tol_kr=0.0)
    with pytest.raises(ValueError):
        ExperimentConfig(tol_a=-1e-9)
    with pytest.raises(ValueError):
        ExperimentConfig(alpha=(0, 1, 0, 1))
    with pytest.raises(ValueError):
        ExperimentConfig(workers=0)
    with pytest.raises(ValueError):
        ExperimentConfig(level=-2)


def test_digest_tracks_content():
    base = ExperimentConfig()
    same = ExperimentConfig()
    assert config_digest(base) == config_digest(same)
    changed = base.with_overrides(N=2 ** 12)
    assert config_digest(changed) != config_digest(base)
    assert len(base.digest()) == 16


def test_load_config_round_trip(tmp_path):
    path = write_config(tmp_path, offset=0.25, sin=[0.05, 0.0],
                        s_list=[-1.0, -0.5], N=1024, workers=2)
    config = load_config(path)
    assert config.offset == 0.25
    assert config.sin == (0.05, 0.0)
    assert config.s_list == (-1.0, -0.5)
    assert config.workers == 2


def test_load_config_rejects_unknown_and_malformed(tmp_path):
    with pytest.raises(ValueError):
        load_config(write_config(tmp_path, "a.toml", bogus=3))
    with pytest.raises(ValueError):
        load_config(write_config(tmp_path, "b.toml", alpha=0.618))
    with pytest.raises(ValueError):
        load_config(write_config(tmp_path, "c.toml", N=63))


# ---------------------------------------------------------------------------
# CLI exit-code contract


def test_usage_errors_exit_1(tmp_path):
    assert main([]) == 1
    assert main(["rho", "--bogus"]) == 1
    assert main(["rho", "--config", str(tmp_path / "missing.toml")]) == 1
    bad = write_config(tmp_path, "bad.toml", N=63)
    assert main(["rho", "--config", bad]) == 1
    empty_s = write_config(tmp_path, "s.toml", offset=GOLDEN_OFFSET,
                           s_list=[], out_dir=str(tmp_path / "o"))
    assert main(["measure", "--config", empty_s]) == 1
    float_alpha = write_config(tmp_path, "fa.toml", alpha=0.618,
                               out_dir=str(tmp_path / "o"))
    assert main(["tongue", "--config", float_alpha]) == 1
    no_grid = write_config(tmp_path, "ng.toml", out_dir=str(tmp_path / "o"))
    assert main(["tongue", "--config", no_grid]) == 1
    assert main(["kr", "/nonexistent/a.amu", "/nonexistent/b.amu"]) == 1


def test_rho_exit_codes(tmp_path):
    ok = write_config(tmp_path, "ok.toml", offset=GOLDEN_OFFSET,
                      out_dir=str(tmp_path / "o1"))
    assert main(["rho", "--config", ok]) == 0
    # A fresh offset so the in-process analysis cache cannot serve a
    # previously computed full-budget result for the same map.
    starved = write_config(tmp_path, "starved.toml", offset=0.123456789,
                           n_orbit=2, out_dir=str(tmp_path / "o2"))
    assert main(["rho", "--config", starved]) == 2
    locked = write_config(tmp_path, "locked.toml", offset=0.0, sin=[0.1],
                          out_dir=str(tmp_path / "o3"))
    assert main(["rho", "--config", locked]) == 0
    ladder = (tmp_path / "o3" / "rho_ladder.csv").read_text()
    assert ladder.startswith("# config_digest: ")


def test_measure_writes_and_kr_roundtrip(tmp_path, capsys):
    out = tmp_path / "m"
    cfg = write_config(tmp_path, "m.toml", offset=GOLDEN_OFFSET,
                       s_list=[-1.0, 0.5], N=256, out_dir=str(out))
    assert main(["measure", "--config", cfg]) == 0
    csv_file = out / "measure_s-1.csv"
    amu_file = out / "measure_s0.5.amu"
    assert csv_file.exists() and amu_file.exists()
    summary = (out / "measures.csv").read_text().splitlines()
    assert summary[0].startswith("# config_digest: ")
    assert summary[1] == "s,N,lam_final,kr_gap,residual,iterations,max_atom"
    mu = GridMeasure.from_csv(csv_file)
    assert mu.N == 256
    capsys.readouterr()
    assert main(["kr", str(csv_file), str(amu_file)]) == 0
    printed = capsys.readouterr().out
    assert "kr_distance = " in printed
    # a rotation has the same (Lebesgue) measure at every exponent
    assert float(printed.split("=")[1]) <= 1.0 / 256


def test_measure_rejects_rational_map(tmp_path):
    cfg = write_config(tmp_path, "rat.toml", offset=0.5, N=256,
                       s_list=[-1.0], out_dir=str(tmp_path / "o"))
    assert main(["measure", "--config", cfg]) == 1


def test_cf_and_partition_outputs(tmp_path):
    out = tmp_path / "cf"
    cfg = write_config(tmp_path, "cf.toml", offset=GOLDEN_OFFSET,
                       level=3, out_dir=str(out))
    assert main(["cf", "--config", cfg]) == 0
    assert main(["partition", "--config", cfg]) == 0
    rows = (out / "partition.csv").read_text().splitlines()
    header_at = next(i for i, r in enumerate(rows)
                     if not r.startswith("#"))
    assert rows[header_at] == "level,index,left,right,length"
    lengths = [float(r.split(",")[4]) for r in rows[header_at + 1:]]
    assert sum(lengths) == pytest.approx(1.0, abs=1e-9)


def test_out_flag_overrides_config(tmp_path):
    other = tmp_path / "elsewhere"
    cfg = write_config(tmp_path, "o.toml", offset=GOLDEN_OFFSET,
                       out_dir=str(tmp_path / "ignored"))
    assert main(["rho", "--config", cfg, "--out", str(other)]) == 0
    assert (other / "rho_ladder.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_outputs_are_deterministic(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    cfg = write_config(tmp_path, "d.toml", offset=GOLDEN_OFFSET,
                       s_list=[-1.0], N=256, level=2,
                       out_dir=str(tmp_path / "unused"))
    for out in (out_a, out_b):
        assert main(["rho", "--config", cfg, "--out", str(out)]) == 0
        assert main(["measure", "--config", cfg, "--out", str(out)]) == 0
        assert main(["partition", "--config", cfg, "--out", str(out)]) == 0
    for name in ("rho_ladder.csv", "measure_s-1.csv", "measure_s-1.amu",
                 "measures.csv", "partition.csv"):
        assert filecmp.cmp(out_a / name, out_b / name, shallow=False), name


def test_verify_select_unknown_is_usage_error(tmp_path):
    cfg = write_config(tmp_path, "v.toml", out_dir=str(tmp_path / "v"))
    assert main(["verify", "--config", cfg, "--select", "nonsense99"]) == 1


def test_verify_runs_selected_regressions(tmp_path, capsys):
    # regression checks skip (exit 0) while baselines are absent and
    # run otherwise; either way the verify plumbing must succeed
    cfg = write_config(tmp_path, "v.toml", out_dir=str(tmp_path / "v"))
    code = main(["verify", "--config", cfg, "--select", "regression-tongue"])
    printed = capsys.readouterr().out
    assert code == 0
    assert "regression-tongue" in printed
    report = (tmp_path / "v" / "verify.csv").read_text()
    assert "regression-tongue" in report
