"""CLI contracts: parsing, resolution order, exit codes, outputs."""
from __future__ import annotations

import pytest

from adaptrx.harness.cli import build_parser, main, resolve_config


class TestParsing:
    def test_all_subcommands_present(self):
        parser = build_parser()
        for cmd in ("train", "sweep", "recovery", "continual", "gradcheck",
                    "delay"):
            args = parser.parse_args([cmd, "--out", "x"])
            assert args.command == cmd

    def test_out_required(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["delay"])
        capsys.readouterr()

    def test_resolution_order_set_then_seed(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("seed = 1\nlink.snr_db = 5\n")
        args = build_parser().parse_args(
            ["delay", "--config", str(p), "--set", "seed=2",
             "--set", "link.snr_db=7", "--seed", "3", "--out", "x"])
        cfg = resolve_config(args)
        assert cfg.seed == 3            # --seed beats --set beats file
        assert cfg.link.snr_db == 7.0   # --set beats file

    def test_repeatable_set(self):
        args = build_parser().parse_args(
            ["delay", "--set", "delay.t_pre=2.0", "--set", "delay.d_post=0",
             "--out", "x"])
        cfg = resolve_config(args)
        assert cfg.delay.t_pre == 2.0
        assert cfg.delay.d_post == 0.0


class TestMain:
    def test_delay_command_runs_and_echoes_hash(self, tmp_path, capsys):
        rc = main(["delay", "--out", str(tmp_path / "d")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "config hash " in out
        assert "seed 0" in out
        assert (tmp_path / "d" / "delay_model.csv").exists()
        assert (tmp_path / "d" / "config.txt").exists()

    def test_bad_key_exits_two(self, tmp_path, capsys):
        rc = main(["delay", "--set", "nope.key=1", "--out", str(tmp_path)])
        err = capsys.readouterr().err
        assert rc == 2
        assert "error:" in err

    def test_bad_value_exits_two(self, tmp_path, capsys):
        rc = main(["delay", "--set", "link.symbols=many",
                   "--out", str(tmp_path)])
        capsys.readouterr()
        assert rc == 2

    def test_missing_checkpoint_for_sweep_exits_two(self, tmp_path, capsys):
        # sweep with a neural receiver but no checkpoint is a config error
        rc = main(["sweep", "--set", "run.receivers=[\"neural-fixed\"]",
                   "--out", str(tmp_path / "s")])
        capsys.readouterr()
        assert rc == 2

    def test_gradcheck_command(self, tmp_path, capsys):
        rc = main(["gradcheck", "--out", str(tmp_path / "g")])
        capsys.readouterr()
        assert rc == 0
        assert (tmp_path / "g" / "gradcheck.csv").exists()
