"""Fixtures compartilhadas: redes pequenas, geradores com semente e quadros sintéticos."""

import numpy as np
import pytest

from src.appearance.gaussian import UpdateConfig
from src.imaging.geometry import BoundingBox
from src.imaging.image_io import ImageBuffer
from src.network.backbone import NetworkConfig, init_network, parse_conv_spec
from src.sampling.sampler import SamplerConfig
from src.tracking.config import TrackerConfig


def make_tiny_network_config(seed: int = 0) -> NetworkConfig:
    return NetworkConfig(
        input_size=16,
        input_channels=1,
        conv_spec=parse_conv_spec("3x3/1/4"),
        fc6_dim=16,
        feature_dim=8,
        seed=seed,
    )


def make_tiny_tracker_config(**overrides) -> TrackerConfig:
    """Configuração barata para testes do rastreador (sem pré-treino por padrão)."""
    values = dict(
        network=make_tiny_network_config(),
        sampler=SamplerConfig(n_pos=8, n_neg=16, n_candidates=24),
        update=UpdateConfig(),
        init_iterations=5,
        pretrain=False,
    )
    values.update(overrides)
    return TrackerConfig(**values)


def textured_frame(rng: np.random.Generator, width: int = 96, height: int = 72,
                   box: BoundingBox = BoundingBox(30, 20, 24, 24)) -> ImageBuffer:
    """Fundo suave com um alvo em blocos de alto contraste dentro da box."""
    yy, xx = np.mgrid[0:height, 0:width]
    background = 110 + 30 * np.sin(xx / 9.0) * np.cos(yy / 11.0)
    x0, y0 = int(box.x), int(box.y)
    w, h = int(box.w), int(box.h)
    blocks = rng.integers(0, 2, size=(h // 4 + 1, w // 4 + 1)) * 200 + 25
    target = np.kron(blocks, np.ones((4, 4)))[:h, :w]
    background[y0:y0 + h, x0:x0 + w] = target
    return ImageBuffer.from_array(background)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_network_config() -> NetworkConfig:
    return make_tiny_network_config()


@pytest.fixture
def tiny_network(tiny_network_config):
    return init_network(tiny_network_config)


@pytest.fixture
def tiny_tracker_config() -> TrackerConfig:
    return make_tiny_tracker_config()


@pytest.fixture
def target_box() -> BoundingBox:
    return BoundingBox(30, 20, 24, 24)


@pytest.fixture
def first_frame(target_box) -> ImageBuffer:
    return textured_frame(np.random.default_rng(7), box=target_box)
