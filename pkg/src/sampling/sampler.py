"""Amostragem dos lotes positivo, negativo e de predição (candidatos multiescala)."""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..errors import SamplingError
from ..imaging.geometry import BoundingBox, iou_many

logger = logging.getLogger(__name__)

MAX_DRAWS = 10_000
MIN_SIDE = 4.0
IOU_TOLERANCE = 1e-12

ImageDims = Tuple[int, int]


@dataclass(frozen=True)
class SamplerConfig:
    """
    Parâmetros de amostragem.

    Attributes:
        n_pos: Tamanho do lote positivo
        n_neg: Tamanho do lote negativo
        pos_min_iou: IoU mínima de um positivo com o alvo
        neg_max_iou: IoU máxima de um negativo com o alvo
        neg_min_center_dist: Distância mínima de centro dos negativos, em fração da diagonal do alvo
        search_radius_factor: Raio de busca em fração de max(w, h)
        search_radius: Raio absoluto em pixels (substitui o fator quando definido)
        n_candidates: Número de candidatos por quadro
        n_scales: Níveis da pirâmide (ímpar)
        scale_step: Passo de escala entre níveis
        rng_seed: Semente do gerador
    """

    n_pos: int = 32
    n_neg: int = 96
    pos_min_iou: float = 0.8
    neg_max_iou: float = 0.2
    neg_min_center_dist: float = 0.5
    search_radius_factor: float = 0.6
    search_radius: Optional[float] = None
    n_candidates: int = 300
    n_scales: int = 3
    scale_step: float = 0.02
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_pos < 1 or self.n_neg < 1 or self.n_candidates < 1:
            raise ValueError("n_pos, n_neg e n_candidates devem ser >= 1")
        if self.n_scales < 1 or self.n_scales % 2 == 0:
            raise ValueError(f"n_scales deve ser ímpar e >= 1 (recebido: {self.n_scales})")
        if not 0.0 < self.scale_step < 1.0:
            raise ValueError(f"scale_step deve estar em (0, 1) (recebido: {self.scale_step})")
        if not self.pos_min_iou > self.neg_max_iou:
            raise ValueError(f"pos_min_iou ({self.pos_min_iou}) deve ser maior que neg_max_iou ({self.neg_max_iou})")
        if self.search_radius is not None and self.search_radius < 0:
            raise ValueError(f"search_radius não pode ser negativo (recebido: {self.search_radius})")


@dataclass(frozen=True)
class CandidateSet:
    """Lote de predição: boxes candidatas e o fator de escala de cada uma."""

    boxes: List[BoundingBox]
    scales: List[float]

    def __len__(self) -> int:
        return len(self.boxes)


def search_radius_for(box: BoundingBox, cfg: SamplerConfig, expanded: bool = False) -> float:
    """Raio de busca em pixels; dobra uma vez quando expanded=True."""
    radius = cfg.search_radius if cfg.search_radius is not None else cfg.search_radius_factor * max(box.w, box.h)
    return 2.0 * radius if expanded else radius


def fit_inside(box: BoundingBox, img_dims: ImageDims) -> BoundingBox:
    """
    Desloca (e, se preciso, reescala preservando a proporção) a box para dentro da imagem.

    Lados menores que 4 pixels são ampliados até 4.
    """
    width, height = img_dims
    w, h = box.w, box.h
    if w > width or h > height:
        factor = min(width / w, height / h)
        w, h = w * factor, h * factor
    if min(w, h) < MIN_SIDE:
        factor = MIN_SIDE / min(w, h)
        w, h = w * factor, h * factor
    x = min(max(box.x, 0.0), max(width - w, 0.0))
    y = min(max(box.y, 0.0), max(height - h, 0.0))
    if (x, y, w, h) == (box.x, box.y, box.w, box.h):
        return box
    return BoundingBox(x, y, w, h)


def sample_positives(box: BoundingBox, img_dims: ImageDims, cfg: SamplerConfig, rng: np.random.Generator) -> List[BoundingBox]:
    """
    Amostra n_pos boxes com IoU >= pos_min_iou em relação à box, incluindo a própria box.

    Centros são deslocados uniformemente em até (1 - pos_min_iou) do lado; sorteios
    que violam a IoU ou cujo centro sai da imagem são rejeitados.

    Raises:
        SamplingError: Se mais de 10 000 sorteios forem necessários
    """
    width, height = img_dims
    shift_x = (1.0 - cfg.pos_min_iou) * box.w
    shift_y = (1.0 - cfg.pos_min_iou) * box.h
    reference = box.to_array()

    samples = [box]
    draws = 0
    while len(samples) < cfg.n_pos:
        needed = cfg.n_pos - len(samples)
        if draws + needed > MAX_DRAWS:
            raise SamplingError(
                f"Amostragem de positivos excedeu {MAX_DRAWS} sorteios para {box} (box muito próxima da borda?)"
            )
        draws += needed
        dx = rng.uniform(-shift_x, shift_x, size=needed)
        dy = rng.uniform(-shift_y, shift_y, size=needed)
        rects = np.column_stack([box.x + dx, box.y + dy, np.full(needed, box.w), np.full(needed, box.h)])
        centers_x = rects[:, 0] + box.w / 2.0
        centers_y = rects[:, 1] + box.h / 2.0
        ok = (
            (iou_many(rects, reference) >= cfg.pos_min_iou - IOU_TOLERANCE)
            & (centers_x >= 0) & (centers_x <= width)
            & (centers_y >= 0) & (centers_y <= height)
        )
        samples.extend(BoundingBox(*row) for row in rects[ok])
    return samples[:cfg.n_pos]


def sample_negatives(box: BoundingBox, img_dims: ImageDims, cfg: SamplerConfig, rng: np.random.Generator) -> List[BoundingBox]:
    """
    Amostra n_neg boxes do tamanho do alvo, centros uniformes na região válida da imagem,
    com IoU <= neg_max_iou e distância de centro >= neg_min_center_dist x diagonal.

    Raises:
        SamplingError: Se não houver posição válida ou os sorteios se esgotarem
    """
    width, height = img_dims
    w, h = min(box.w, float(width)), min(box.h, float(height))
    cx, cy = box.center
    min_distance = cfg.neg_min_center_dist * box.diagonal

    x_range = (w / 2.0, width - w / 2.0)
    y_range = (h / 2.0, height - h / 2.0)
    farthest = max(
        math.hypot(px - cx, py - cy) for px in x_range for py in y_range
    )
    if farthest < min_distance:
        raise SamplingError(
            f"Imagem {width}x{height} não comporta negativos a {min_distance:.1f}px do centro de {box}"
        )

    reference = box.to_array()
    samples: List[BoundingBox] = []
    draws = 0
    while len(samples) < cfg.n_neg:
        needed = cfg.n_neg - len(samples)
        if draws >= MAX_DRAWS:
            raise SamplingError(f"Amostragem de negativos excedeu {MAX_DRAWS} sorteios para {box}")
        block = min(max(needed * 4, 64), MAX_DRAWS - draws)
        draws += block
        centers_x = rng.uniform(x_range[0], x_range[1], size=block)
        centers_y = rng.uniform(y_range[0], y_range[1], size=block)
        rects = np.column_stack([centers_x - w / 2.0, centers_y - h / 2.0, np.full(block, w), np.full(block, h)])
        ok = (
            (np.hypot(centers_x - cx, centers_y - cy) >= min_distance)
            & (iou_many(rects, reference) <= cfg.neg_max_iou)
        )
        samples.extend(BoundingBox(*row) for row in rects[ok][:needed])
    return samples


def effective_scale_step(box: BoundingBox, step: float) -> float:
    """
    Passo de escala aumentado até que um nível mude o menor lado em pelo menos 1 pixel.

    Returns:
        float: max(step, 1 / min(w, h))
    """
    if not step > 0:
        raise ValueError(f"step deve ser maior que 0 (recebido: {step})")
    return max(step, 1.0 / min(box.w, box.h))


def scale_multipliers(box: BoundingBox, cfg: SamplerConfig) -> List[float]:
    """Fatores 1 + k·passo, k centrado em 0, para os n_scales níveis."""
    step = effective_scale_step(box, cfg.scale_step)
    half = (cfg.n_scales - 1) // 2
    return [1.0 + k * step for k in range(-half, half + 1)]


def generate_candidates(
    prev_box: BoundingBox,
    img_dims: ImageDims,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    radius: Optional[float] = None,
) -> CandidateSet:
    """
    Gera o lote de predição ao redor da box anterior.

    Centros uniformes em um disco de raio de busca; escalas percorrem os níveis da
    pirâmide em ordem cíclica; proporção fixa; a box anterior é sempre o primeiro candidato.

    Args:
        prev_box: Localização anterior do alvo
        img_dims: (largura, altura) do quadro
        cfg: Configuração de amostragem
        rng: Gerador do chamador
        radius: Raio em pixels (padrão: search_radius_for(prev_box, cfg))

    Returns:
        CandidateSet: n_candidates boxes dentro da imagem
    """
    radius = search_radius_for(prev_box, cfg) if radius is None else radius
    multipliers = scale_multipliers(prev_box, cfg)
    count = cfg.n_candidates - 1

    distances = radius * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=count)
    boxes = [fit_inside(prev_box, img_dims)]
    scales = [1.0]
    for index in range(count):
        # o nível central vem primeiro para que candidatos com poucos sorteios cubram a escala atual
        scale = multipliers[(index + len(multipliers) // 2) % len(multipliers)]
        w, h = prev_box.w * scale, prev_box.h * scale
        dx = distances[index] * np.cos(angles[index])
        dy = distances[index] * np.sin(angles[index])
        x = prev_box.x + dx + (prev_box.w - w) / 2.0
        y = prev_box.y + dy + (prev_box.h - h) / 2.0
        boxes.append(fit_inside(BoundingBox(float(x), float(y), w, h), img_dims))
        scales.append(scale)

    logger.debug(f"{len(boxes)} candidatos gerados ao redor de {prev_box} (raio {radius:.1f}px)")
    return CandidateSet(boxes=boxes, scales=scales)
