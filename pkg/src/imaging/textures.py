"""Texturas procedurais para sequências sintéticas e patches de objectness."""

import logging

import numpy as np

from .geometry import BoundingBox, crop_resize_batch
from .image_io import ImageBuffer

logger = logging.getLogger(__name__)


def block_texture(rng: np.random.Generator, width: int, height: int, block: int = 5,
                  low: int = 25, high: int = 230) -> np.ndarray:
    """
    Textura de blocos de alto contraste.

    Cada bloco block x block recebe um nível escuro ou claro (com leve variação),
    o que dá ao alvo bordas fortes em todas as direções.

    Returns:
        np.ndarray: Array float64 (height, width)
    """
    rows = -(-height // block)
    cols = -(-width // block)
    bright = rng.integers(0, 2, size=(rows, cols)).astype(bool)
    levels = np.where(bright, high, low) + rng.uniform(-15.0, 15.0, size=(rows, cols))
    return np.repeat(np.repeat(levels, block, axis=0), block, axis=1)[:height, :width]


def smooth_field(rng: np.random.Generator, width: int, height: int, cells: int = 6,
                 low: float = 70.0, high: float = 180.0) -> np.ndarray:
    """
    Campo de baixa frequência: grade grosseira aleatória interpolada bilinearmente.

    Returns:
        np.ndarray: Array float64 (height, width) com valores em [low, high]
    """
    cells_y = max(1, round(cells * height / max(width, 1)))
    coarse = rng.uniform(low, high, size=(cells_y + 1, cells + 1))
    xs = np.linspace(0.0, cells, width)
    ys = np.linspace(0.0, cells_y, height)
    rows = np.stack([np.interp(xs, np.arange(cells + 1), line) for line in coarse])
    return np.stack([np.interp(ys, np.arange(cells_y + 1), column) for column in rows.T], axis=1)


def resample(texture: np.ndarray, width: int, height: int) -> np.ndarray:
    """Reamostra uma textura (H, W) para width x height com a mesma interpolação dos patches."""
    source = ImageBuffer.from_array(texture)
    full = BoundingBox(0.0, 0.0, float(source.width), float(source.height))
    return crop_resize_batch(source, [full], width, height)[0, :, :, 0].astype(np.float64)


def quantize(values: np.ndarray, rng: np.random.Generator, noise_sigma: float = 0.0) -> np.ndarray:
    """Soma ruído gaussiano opcional e quantiza para uint8 com round-half-up."""
    if noise_sigma > 0:
        values = values + rng.normal(0.0, noise_sigma, size=values.shape)
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)
