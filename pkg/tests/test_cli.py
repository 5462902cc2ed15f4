import argparse
import json

import pytest

from src.cli.cli import (
    COMMAND_NAMES,
    GdtCli,
    build_parser,
    load_command_definition,
    parse_interval,
    parse_pair,
    parse_size,
)
from src.services.benchmark_service import BenchmarkService
from src.services.pretrain_service import PretrainService
from src.services.tracking_service import TrackingService
from tests.conftest import make_tiny_tracker_config


@pytest.fixture
def cli():
    cfg = make_tiny_tracker_config()
    return GdtCli(
        tracking_service=TrackingService(base_config=cfg),
        pretrain_service=PretrainService(base_config=cfg),
        benchmark_service=BenchmarkService(base_config=cfg),
    )


def _run(cli, capsys, argv):
    code = cli.run(argv)
    return code, json.loads(capsys.readouterr().out)


class TestArgumentTypes:
    def test_pair(self):
        assert parse_pair("2,-1.5") == (2.0, -1.5)
        with pytest.raises(argparse.ArgumentTypeError):
            parse_pair("2")

    def test_interval(self):
        assert parse_interval("40:46") == (40, 46)
        for text in ("5:5", "0:3", "a:b", "1:2:3"):
            with pytest.raises(argparse.ArgumentTypeError):
                parse_interval(text)

    def test_size(self):
        assert parse_size("40x30") == (40, 30)
        assert parse_size("16X16") == (16, 16)
        with pytest.raises(argparse.ArgumentTypeError):
            parse_size("40")


class TestParser:
    def test_every_command_has_a_definition(self):
        for name in COMMAND_NAMES:
            assert load_command_definition(name)["name"] == name

    def test_missing_definition(self):
        with pytest.raises(FileNotFoundError):
            load_command_definition("teleport")

    def test_synth_defaults(self):
        args = build_parser().parse_args(["synth", "--out", "seq"])
        assert args.velocity == (2.0, 1.0)
        assert args.target == (40, 40)
        assert args.frames == 100
        assert args.occlude is None

    def test_track_flags(self):
        args = build_parser().parse_args(
            ["track", "--seq", "s", "--out", "r.txt", "--seed", "7", "--freeze-net", "--no-pretrain"]
        )
        assert (args.seed, args.freeze_net, args.no_pretrain, args.state_out) == (7, True, True, None)

    @pytest.mark.parametrize("command", [["bench", "--seqs", "a"], ["pretrain", "--corpus", "c", "--iters", "1", "--out", "w"]])
    def test_seed_defaults_to_config_file(self, command):
        assert build_parser().parse_args(command).seed is None

    def test_ablate_seeds(self):
        args = build_parser().parse_args(["ablate", "--seqs", "a", "b", "--seeds", "0", "1", "2"])
        assert args.seqs == ["a", "b"]
        assert args.seeds == [0, 1, 2]

    def test_missing_required_argument_exits_with_2(self):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["track", "--seq", "s"])
        assert info.value.code == 2


class TestRun:
    def test_synth_then_track_then_eval(self, cli, capsys, tmp_path):
        seq = tmp_path / "seq"
        code, result = _run(cli, capsys, ["synth", "--out", str(seq), "--frames", "4", "--width", "96",
                                          "--height", "72", "--target", "24x24", "--occlude", "2:3"])
        assert code == 0, result
        assert result["attributes"] == ["OCC"]

        code, result = _run(cli, capsys, ["track", "--seq", str(seq), "--out", str(tmp_path / "r.txt"),
                                          "--seed", "5"])
        assert code == 0, result
        assert result["frames"] == 4

        code, result = _run(cli, capsys, ["eval", "--results", str(tmp_path / "r.txt"),
                                          "--gt", str(seq / "groundtruth_rect.txt"), "--csv", str(tmp_path / "r.csv")])
        assert code == 0, result
        assert 0.0 <= result["success_auc"] <= 1.0

    def test_failure_exits_with_1(self, cli, capsys, tmp_path):
        code, result = _run(cli, capsys, ["track", "--seq", str(tmp_path / "absent"), "--out", str(tmp_path / "r.txt")])
        assert code == 1
        assert result["success"] is False

    def test_precondition_error_becomes_failure(self, cli, capsys):
        code, result = _run(cli, capsys, ["track", "--seq", "s", "--out", "r.txt", "--seed", "-1"])
        assert code == 1
        assert "seed" in result["error"]

    def test_unknown_ablation_configuration(self, cli, capsys, tmp_path):
        code, result = _run(cli, capsys, ["ablate", "--seqs", str(tmp_path), "--configurations", "bogus"])
        assert code == 1
        assert "bogus" in result["message"]
