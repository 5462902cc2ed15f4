from pathlib import Path

import pytest

from src.bench.report import read_report
from src.bench.sequence import GROUNDTRUTH_FILE, read_results
from src.bench.synth import SynthParams, synth_sequence
from src.network.weights import load_weights
from src.services.benchmark_service import BenchmarkService
from src.services.evaluation_service import EvaluationService
from src.services.pretrain_service import PretrainService
from src.services.synthesis_service import SynthesisService
from src.services.tracking_service import TrackingService
from src.tracking.state_store import load_state
from tests.conftest import make_tiny_tracker_config


@pytest.fixture
def sequence_dir(tmp_path):
    params = SynthParams(frames=5, width=96, height=72, target_size=(24, 24), noise_sigma=4.0)
    synth_sequence(params, 2, tmp_path / "seq")
    return tmp_path / "seq"


@pytest.fixture
def tracking_service():
    return TrackingService(base_config=make_tiny_tracker_config())


class TestTrackingService:
    def test_writes_results(self, tmp_path, sequence_dir, tracking_service):
        out = tmp_path / "results.txt"
        result = tracking_service.track(str(sequence_dir), str(out), seed=3)
        assert result["success"], result
        assert result["frames"] == 5
        assert len(read_results(out)) == 5
        assert result["config"]["seed"] == 3

    def test_same_seed_same_bytes(self, tmp_path, sequence_dir, tracking_service):
        for name in ("a", "b"):
            result = tracking_service.track(str(sequence_dir), str(tmp_path / f"{name}.txt"), seed=1,
                                            state_out=str(tmp_path / f"{name}.gdtw"))
            assert result["success"], result
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
        assert (tmp_path / "a.gdtw").read_bytes() == (tmp_path / "b.gdtw").read_bytes()

    def test_flags_reach_the_state(self, tmp_path, sequence_dir, tracking_service):
        state_out = tmp_path / "state.gdtw"
        result = tracking_service.track(str(sequence_dir), str(tmp_path / "r.txt"), freeze_net=True,
                                        state_out=str(state_out))
        assert result["config"]["freeze_net"]
        assert load_state(state_out).freeze_net

    def test_missing_sequence_reports_failure(self, tmp_path, tracking_service):
        result = tracking_service.track(str(tmp_path / "absent"), str(tmp_path / "r.txt"))
        assert not result["success"]
        assert "img" in result["error"]

    def test_empty_sequence_argument(self, tracking_service):
        with pytest.raises(ValueError):
            tracking_service.track("", "results.txt")

    def test_negative_seed(self, tracking_service):
        with pytest.raises(ValueError):
            tracking_service.track("seq", "results.txt", seed=-1)


class TestEvaluationService:
    def test_ground_truth_against_itself(self, tmp_path, sequence_dir):
        gt = sequence_dir / GROUNDTRUTH_FILE
        result = EvaluationService().evaluate(str(gt), str(gt), str(tmp_path / "r.csv"), str(tmp_path / "r.svg"))
        assert result["success"], result
        assert result["precision20"] == 1.0
        assert result["success_auc"] == 1.0
        assert (tmp_path / "r.svg").exists()
        precision, _ = read_report(tmp_path / "r.csv")
        assert precision.samples[0] == (0.0, 1.0)

    def test_length_mismatch_is_failure(self, tmp_path, sequence_dir):
        short = tmp_path / "short.txt"
        short.write_text("1,1,24,24\n", encoding="utf-8")
        result = EvaluationService().evaluate(str(short), str(sequence_dir / GROUNDTRUTH_FILE), str(tmp_path / "r.csv"))
        assert not result["success"]


class TestSynthesisService:
    def test_synth(self, tmp_path):
        result = SynthesisService().synth(str(tmp_path / "s"), frames=12, seed=1, occlude=(4, 7),
                                          width=80, height=60, target=(16, 16))
        assert result["success"], result
        assert result["frames"] == 12
        assert result["attributes"] == ["OCC"]
        assert result["occluded_frames"] == 3

    def test_invalid_geometry_is_failure(self, tmp_path):
        result = SynthesisService().synth(str(tmp_path / "s"), frames=2, width=20, height=20, target=(40, 40))
        assert not result["success"]

    def test_zero_frames(self, tmp_path):
        with pytest.raises(ValueError):
            SynthesisService().synth(str(tmp_path / "s"), frames=0)

    def test_synth_corpus(self, tmp_path):
        result = SynthesisService().synth_corpus(str(tmp_path / "c"), count=3, size=12)
        assert (result["objects"], result["backgrounds"]) == (3, 3)


class TestPretrainService:
    def test_writes_loadable_weights(self, tmp_path):
        SynthesisService().synth_corpus(str(tmp_path / "corpus"), count=4, size=16)
        out = tmp_path / "w.gdtw"
        result = PretrainService(base_config=make_tiny_tracker_config()).pretrain(
            str(tmp_path / "corpus"), iters=2, out=str(out), seed=1
        )
        assert result["success"], result
        assert load_weights(out).config.feature_dim == 8

    def test_config_file_seed_is_kept_without_override(self, tmp_path):
        SynthesisService().synth_corpus(str(tmp_path / "corpus"), count=4, size=16)
        config = tmp_path / "gdt.conf"
        config.write_text("seed = 4\n", encoding="utf-8")
        service = PretrainService(base_config=make_tiny_tracker_config())

        kept = service.pretrain(str(tmp_path / "corpus"), iters=1, out=str(tmp_path / "a.gdtw"), config=str(config))
        replaced = service.pretrain(str(tmp_path / "corpus"), iters=1, out=str(tmp_path / "b.gdtw"),
                                    seed=1, config=str(config))

        assert kept["seed"] == 4
        assert replaced["seed"] == 1

    def test_empty_corpus_is_failure(self, tmp_path):
        result = PretrainService(base_config=make_tiny_tracker_config()).pretrain(
            str(tmp_path), iters=1, out=str(tmp_path / "w.gdtw")
        )
        assert not result["success"]

    def test_negative_iterations(self, tmp_path):
        with pytest.raises(ValueError):
            PretrainService().pretrain("corpus", iters=-1, out="w.gdtw")


class TestBenchmarkService:
    def test_bench_with_report(self, tmp_path, sequence_dir):
        service = BenchmarkService(base_config=make_tiny_tracker_config())
        result = service.bench([str(sequence_dir)], csv=str(tmp_path / "b.csv"), workers=1)
        assert result["success"], result
        assert result["sequences"][0]["name"] == "seq"
        assert Path(tmp_path / "b.csv").exists()

    def test_config_file_seed_is_kept_without_override(self, tmp_path, sequence_dir):
        config = tmp_path / "gdt.conf"
        config.write_text("seed = 3\n", encoding="utf-8")
        service = BenchmarkService(base_config=make_tiny_tracker_config())
        assert service.bench([str(sequence_dir)], config=str(config), workers=1)["seed"] == 3
        assert service.bench([str(sequence_dir)], config=str(config), seed=2, workers=1)["seed"] == 2

    def test_negative_seed(self, sequence_dir):
        with pytest.raises(ValueError):
            BenchmarkService().bench([str(sequence_dir)], seed=-1)

    def test_empty_sequence_list(self):
        with pytest.raises(ValueError):
            BenchmarkService().bench([])

    def test_unknown_ablation_configuration(self, sequence_dir):
        with pytest.raises(ValueError, match="bogus"):
            BenchmarkService().ablate([str(sequence_dir)], [0], configurations=["bogus"])

    def test_ablate(self, sequence_dir):
        service = BenchmarkService(base_config=make_tiny_tracker_config())
        result = service.ablate([str(sequence_dir)], [0], configurations=["no_obj_general_no_bp"], workers=1)
        assert result["success"], result
        assert result["rows"][0]["configuration"] == "no_obj_general_no_bp"
