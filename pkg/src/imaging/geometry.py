"""Aritmética de bounding boxes e extração de patches."""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import GeometryError
from .image_io import ImageBuffer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundingBox:
    """
    Região retangular alinhada aos eixos, em pixels, origem 0 no canto superior esquerdo.

    Attributes:
        x: Borda esquerda
        y: Borda superior
        w: Largura (> 0)
        h: Altura (> 0)
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        values = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in values):
            raise GeometryError(f"Bounding box com valores não finitos: {values}")
        if self.w <= 0 or self.h <= 0:
            raise GeometryError(f"Bounding box com largura/altura não positiva: w={self.w}, h={self.h}")

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> "BoundingBox":
        return cls(cx - w / 2.0, cy - h / 2.0, w, h)

    @property
    def center(self) -> Tuple[float, float]:
        return self.x + self.w / 2.0, self.y + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def aspect(self) -> float:
        """Razão largura/altura."""
        return self.w / self.h

    @property
    def diagonal(self) -> float:
        return math.hypot(self.w, self.h)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)


def boxes_to_array(boxes: Sequence[BoundingBox]) -> np.ndarray:
    """Converte uma lista de boxes em array (K, 4) [x, y, w, h]."""
    if len(boxes) == 0:
        return np.zeros((0, 4), dtype=np.float64)
    return np.array([[b.x, b.y, b.w, b.h] for b in boxes], dtype=np.float64)


def iou_many(rects_a: np.ndarray, rects_b: np.ndarray) -> np.ndarray:
    """
    IoU elemento a elemento entre arrays (K, 4) [x, y, w, h] (broadcast permitido).

    Returns:
        np.ndarray: IoU por par, em [0, 1]
    """
    rects_a = np.atleast_2d(rects_a)
    rects_b = np.atleast_2d(rects_b)
    left = np.maximum(rects_a[:, 0], rects_b[:, 0])
    right = np.minimum(rects_a[:, 0] + rects_a[:, 2], rects_b[:, 0] + rects_b[:, 2])
    top = np.maximum(rects_a[:, 1], rects_b[:, 1])
    bottom = np.minimum(rects_a[:, 1] + rects_a[:, 3], rects_b[:, 1] + rects_b[:, 3])

    intersection = np.maximum(0.0, right - left) * np.maximum(0.0, bottom - top)
    union = rects_a[:, 2] * rects_a[:, 3] + rects_b[:, 2] * rects_b[:, 3] - intersection
    return np.clip(intersection / union, 0.0, 1.0)


def center_distance_many(rects_a: np.ndarray, rects_b: np.ndarray) -> np.ndarray:
    """Distância euclidiana entre centros para arrays (K, 4)."""
    rects_a = np.atleast_2d(rects_a)
    rects_b = np.atleast_2d(rects_b)
    ca = rects_a[:, :2] + rects_a[:, 2:] / 2.0
    cb = rects_b[:, :2] + rects_b[:, 2:] / 2.0
    return np.hypot(ca[:, 0] - cb[:, 0], ca[:, 1] - cb[:, 1])


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """
    Interseção sobre união de duas boxes.

    Args:
        a: Primeira box
        b: Segunda box

    Returns:
        float: area(a∩b) / area(a∪b), 0 quando disjuntas
    """
    left = max(a.x, b.x)
    right = min(a.x + a.w, b.x + b.w)
    top = max(a.y, b.y)
    bottom = min(a.y + a.h, b.y + b.h)
    intersection = max(0.0, right - left) * max(0.0, bottom - top)
    union = a.area + b.area - intersection
    return min(1.0, max(0.0, intersection / union))


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Distância euclidiana entre os centros de duas boxes, em pixels."""
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


def _check_overlap(box: BoundingBox, width: int, height: int) -> None:
    if box.x + box.w <= 0 or box.x >= width or box.y + box.h <= 0 or box.y >= height:
        raise GeometryError(f"Box {box} totalmente fora da imagem {width}x{height}")


def crop_resize_batch(img: ImageBuffer, boxes: Sequence[BoundingBox], out_w: int, out_h: int) -> np.ndarray:
    """
    Reamostra bilinearmente cada box para out_w x out_h.

    Centros de pixel em meio-pixel; coordenadas fora da imagem são limitadas
    ao pixel de borda mais próximo; quantização round-half-up para 8 bits.

    Args:
        img: Imagem de origem
        boxes: Boxes a extrair (cada uma deve sobrepor a imagem)
        out_w: Largura de saída (>= 1)
        out_h: Altura de saída (>= 1)

    Returns:
        np.ndarray: Array uint8 (K, out_h, out_w, C)

    Raises:
        GeometryError: Se alguma box estiver totalmente fora da imagem ou a saída for vazia
    """
    if out_w < 1 or out_h < 1:
        raise GeometryError(f"Tamanho de saída inválido: {out_w}x{out_h}")
    for box in boxes:
        _check_overlap(box, img.width, img.height)

    count = len(boxes)
    if count == 0:
        return np.zeros((0, out_h, out_w, img.channels), dtype=np.uint8)

    rects = boxes_to_array(boxes)
    xs = rects[:, 0:1] + (np.arange(out_w) + 0.5)[None, :] * (rects[:, 2:3] / out_w) - 0.5
    ys = rects[:, 1:2] + (np.arange(out_h) + 0.5)[None, :] * (rects[:, 3:4] / out_h) - 0.5

    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = (xs - x0)[:, None, :, None]
    fy = (ys - y0)[:, :, None, None]
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    x0c = np.clip(x0, 0, img.width - 1)
    x1c = np.clip(x0 + 1, 0, img.width - 1)
    y0c = np.clip(y0, 0, img.height - 1)
    y1c = np.clip(y0 + 1, 0, img.height - 1)

    source = img.data.astype(np.float64)
    rows0 = y0c[:, :, None]
    rows1 = y1c[:, :, None]
    cols0 = x0c[:, None, :]
    cols1 = x1c[:, None, :]

    top = source[rows0, cols0] * (1.0 - fx) + source[rows0, cols1] * fx
    bottom = source[rows1, cols0] * (1.0 - fx) + source[rows1, cols1] * fx
    values = top * (1.0 - fy) + bottom * fy

    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def crop_resize(img: ImageBuffer, box: BoundingBox, out_w: int, out_h: int) -> ImageBuffer:
    """
    Reamostra a região da box para out_w x out_h (ver crop_resize_batch).

    Returns:
        ImageBuffer: Patch com o mesmo número de canais da imagem
    """
    patch = crop_resize_batch(img, [box], out_w, out_h)[0]
    return ImageBuffer(width=out_w, height=out_h, channels=img.channels, data=patch)
