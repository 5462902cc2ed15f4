import numpy as np
import pytest

from src.errors import WeightFormatError
from src.imaging.geometry import BoundingBox
from src.network.weights import read_container, save_weights, write_container
from src.tracking.state_store import (
    BOX_SECTION,
    META_SECTION,
    REQUIRED_SECTIONS,
    SEED_SECTION,
    load_state,
    save_state,
    state_from_tensors,
    state_to_tensors,
)
from src.tracking.tracker import initialize, track_frame
from tests.conftest import make_tiny_tracker_config, textured_frame


@pytest.fixture
def tracked_state(first_frame, target_box, tiny_tracker_config, tiny_network):
    state = initialize(first_frame, target_box, tiny_tracker_config, tiny_network)
    track_frame(state, textured_frame(np.random.default_rng(7), box=BoundingBox(32, 21, 24, 24)))
    return state


class TestSaveLoad:
    def test_round_trip_is_equal(self, tmp_path, tracked_state, tiny_tracker_config):
        path = tmp_path / "state.gdtw"
        save_state(tracked_state, path)
        loaded = load_state(path, tiny_tracker_config)
        assert loaded == tracked_state
        assert loaded.frame_index == 1

    def test_resumed_tracking_matches(self, tmp_path, tracked_state, tiny_tracker_config):
        path = tmp_path / "state.gdtw"
        save_state(tracked_state, path)
        resumed = load_state(path, tiny_tracker_config)

        frame = textured_frame(np.random.default_rng(7), box=BoundingBox(34, 22, 24, 24))
        assert track_frame(resumed, frame) == track_frame(tracked_state, frame)
        assert resumed == tracked_state

    def test_default_config_uses_saved_seed(self, tmp_path, first_frame, target_box, tiny_network):
        state = initialize(first_frame, target_box, make_tiny_tracker_config(seed=5, freeze_net=True), tiny_network)
        path = tmp_path / "state.gdtw"
        save_state(state, path)
        loaded = load_state(path)
        assert loaded.config.seed == 5
        assert loaded.config.freeze_net
        assert loaded.config.network.feature_dim == state.net.config.feature_dim


    def test_seed_above_float_precision_round_trips(self, tmp_path, first_frame, target_box, tiny_network):
        seed = 2 ** 53 + 1
        state = initialize(first_frame, target_box, make_tiny_tracker_config(seed=seed), tiny_network)
        path = tmp_path / "state.gdtw"
        save_state(state, path)

        loaded = load_state(path)

        assert loaded.seed == seed
        assert loaded.config.seed == seed
        assert read_container(path)[SEED_SECTION].dtype == np.int64


class TestCorruptState:
    def test_missing_section_is_named(self, tracked_state):
        tensors = state_to_tensors(tracked_state)
        del tensors["gauss_neg/var"]
        with pytest.raises(WeightFormatError) as info:
            state_from_tensors(tensors)
        assert info.value.section == "gauss_neg/var"

    def test_weights_only_file_is_rejected(self, tmp_path, tiny_network):
        path = tmp_path / "weights.gdtw"
        save_weights(tiny_network, path)
        with pytest.raises(WeightFormatError, match="estado"):
            load_state(path)

    def test_nonpositive_variance(self, tracked_state):
        tensors = state_to_tensors(tracked_state)
        tensors["gauss_pos/var"] = np.zeros_like(tensors["gauss_pos/var"])
        with pytest.raises(WeightFormatError, match="gauss_pos/var"):
            state_from_tensors(tensors)

    def test_bad_box(self, tracked_state):
        tensors = state_to_tensors(tracked_state)
        tensors[BOX_SECTION] = np.array([0.0, 0.0, -1.0, 4.0])
        with pytest.raises(WeightFormatError, match=BOX_SECTION):
            state_from_tensors(tensors)

    def test_short_meta(self, tmp_path, tracked_state):
        tensors = state_to_tensors(tracked_state)
        tensors[META_SECTION] = tensors[META_SECTION][:3]
        path = tmp_path / "state.gdtw"
        write_container(path, tensors)
        with pytest.raises(WeightFormatError):
            load_state(path)


    def test_negative_seed_section(self, tracked_state):
        tensors = state_to_tensors(tracked_state)
        tensors[SEED_SECTION] = np.array([-1], dtype=np.int64)
        with pytest.raises(WeightFormatError, match=SEED_SECTION):
            state_from_tensors(tensors)

    def test_float_seed_section(self, tracked_state):
        tensors = state_to_tensors(tracked_state)
        tensors[SEED_SECTION] = np.array([3.0])
        with pytest.raises(WeightFormatError, match=SEED_SECTION):
            state_from_tensors(tensors)


def test_all_required_sections_written(tmp_path, tracked_state):
    path = tmp_path / "state.gdtw"
    save_state(tracked_state, path)
    assert set(REQUIRED_SECTIONS) <= set(read_container(path))
