import numpy as np
import pytest

from src.bench.synth import synth_corpus
from src.network.backbone import NetworkConfig, init_network, networks_equal, parse_conv_spec
from src.tracking.pretrain import (
    ObjectnessTrainer,
    load_objectness_corpus,
    pretrain_objectness,
    pretrained_network,
    synthetic_objectness_corpus,
)
from tests.conftest import make_tiny_tracker_config


class TestSyntheticCorpus:
    def test_shapes_and_labels(self):
        patches, labels = synthetic_objectness_corpus(count=5, size=16, seed=0)
        assert patches.shape == (10, 16, 16)
        assert patches.dtype == np.uint8
        np.testing.assert_array_equal(labels, [1] * 5 + [0] * 5)

    def test_deterministic(self):
        a, _ = synthetic_objectness_corpus(4, 16, seed=3)
        b, _ = synthetic_objectness_corpus(4, 16, seed=3)
        np.testing.assert_array_equal(a, b)

    def test_objects_have_more_contrast(self):
        patches, labels = synthetic_objectness_corpus(20, 32, seed=1)
        spread = patches.reshape(len(patches), -1).astype(float).std(axis=1)
        assert spread[labels == 1].mean() > spread[labels == 0].mean()


class TestObjectnessTrainer:
    def test_training_lowers_loss(self, tiny_network):
        patches, labels = synthetic_objectness_corpus(32, 16, seed=0)
        trainer = ObjectnessTrainer(tiny_network, learning_rate=0.05, batch_size=16, seed=0)

        losses = trainer.train(patches, labels, iterations=150)

        assert len(losses) == 150
        assert np.mean(losses[-20:]) < np.mean(losses[:20])

    def test_separates_held_out_patches(self):
        config = NetworkConfig(input_size=32, conv_spec=parse_conv_spec("5x5/1/8,3x3/1/8"), fc6_dim=32, feature_dim=16)
        train_patches, train_labels = synthetic_objectness_corpus(64, 32, seed=0)
        test_patches, test_labels = synthetic_objectness_corpus(50, 32, seed=1)
        trainer = ObjectnessTrainer(init_network(config), learning_rate=0.05, batch_size=32, seed=0)

        trainer.train(train_patches, train_labels, iterations=400)

        assert trainer.accuracy(test_patches, test_labels) > 0.9

    def test_updates_conv_layers(self, tiny_network):
        before = tiny_network.copy()
        patches, labels = synthetic_objectness_corpus(4, 16, seed=0)
        ObjectnessTrainer(tiny_network, seed=0).step(patches, labels)
        assert not np.array_equal(tiny_network.params["conv1.weight"], before.params["conv1.weight"])

    def test_rejects_bad_learning_rate(self, tiny_network):
        with pytest.raises(ValueError):
            ObjectnessTrainer(tiny_network, learning_rate=0.0)

    def test_empty_corpus(self, tiny_network):
        with pytest.raises(ValueError):
            ObjectnessTrainer(tiny_network).train(np.zeros((0, 16, 16), dtype=np.uint8), np.zeros(0), 1)


class TestPretrainObjectness:
    def test_zero_iterations_returns_initial_network(self):
        cfg = make_tiny_tracker_config(seed=2)
        assert networks_equal(pretrain_objectness(None, 0, cfg), init_network(cfg.network, seed=2))

    def test_given_network_is_not_modified(self, tiny_network):
        before = tiny_network.copy()
        trained = pretrain_objectness(None, 3, make_tiny_tracker_config(pretrain_corpus_size=8), net=tiny_network)
        assert networks_equal(tiny_network, before)
        assert not networks_equal(trained, before)

    def test_reads_corpus_from_disk(self, tmp_path):
        synth_corpus(tmp_path, count=6, size=20, seed=0)
        cfg = make_tiny_tracker_config(pretrain_batch_size=4)
        net = pretrain_objectness(tmp_path, 2, cfg)
        assert net.config == cfg.network

    def test_negative_iterations(self):
        with pytest.raises(ValueError):
            pretrain_objectness(None, -1, make_tiny_tracker_config())


class TestLoadObjectnessCorpus:
    def test_resamples_to_input_size(self, tmp_path):
        synth_corpus(tmp_path, count=3, size=20, seed=0)
        patches, labels = load_objectness_corpus(tmp_path, size=16)
        assert patches.shape == (6, 16, 16, 1)
        assert labels.sum() == 3

    def test_missing_background_folder(self, tmp_path):
        (tmp_path / "object").mkdir()
        with pytest.raises(ValueError, match="vazio"):
            load_objectness_corpus(tmp_path, size=16)


def test_pretrained_network_is_cached_but_returned_as_copy():
    cfg = make_tiny_tracker_config(pretrain=True, pretrain_iterations=2, pretrain_corpus_size=4)
    first = pretrained_network(cfg)
    second = pretrained_network(cfg)
    assert networks_equal(first, second)
    assert first is not second
    first.params["fc7.bias"][0] += 1.0
    assert not networks_equal(first, pretrained_network(cfg))
