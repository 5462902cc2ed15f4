"""Geradores sintéticos: sequências com alvo texturizado e corpus de objectness."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..errors import GeometryError
from ..imaging.geometry import BoundingBox
from ..imaging.image_io import ImageBuffer, save_image
from ..imaging.textures import block_texture, quantize, resample, smooth_field
from ..tracking.pretrain import BACKGROUND_DIR, OBJECT_DIR, synthetic_objectness_corpus
from .sequence import (
    ATTRIBUTES_FILE,
    GROUNDTRUTH_FILE,
    IMAGE_DIR,
    OCCLUSION_FILE,
    Sequence,
    format_box_line,
    load_sequence,
)

logger = logging.getLogger(__name__)

OCCLUDER_MARGIN = 6
MIN_TARGET_SIDE = 8


@dataclass(frozen=True)
class SynthParams:
    """
    Parâmetros de uma sequência sintética.

    Attributes:
        frames: Número de quadros
        width: Largura dos quadros
        height: Altura dos quadros
        target_size: (largura, altura) inicial do alvo
        velocity: Deslocamento (vx, vy) do centro por quadro, refletido nas bordas
        noise_sigma: Desvio do ruído gaussiano por pixel
        occlusion: Intervalo [A, B) de quadros (numeração 1-based) com o alvo coberto
        scale_drift: Variação relativa do tamanho por quadro
    """

    frames: int = 100
    width: int = 320
    height: int = 240
    target_size: Tuple[int, int] = (40, 40)
    velocity: Tuple[float, float] = (2.0, 1.0)
    noise_sigma: float = 8.0
    occlusion: Optional[Tuple[int, int]] = None
    scale_drift: float = 0.0

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError(f"frames deve ser maior que 0 (recebido: {self.frames})")
        tw, th = self.target_size
        if min(tw, th) < MIN_TARGET_SIDE or tw > self.width or th > self.height:
            raise GeometryError(f"Alvo {tw}x{th} incompatível com quadro {self.width}x{self.height}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma não pode ser negativo (recebido: {self.noise_sigma})")
        if not -0.1 < self.scale_drift < 0.1:
            raise ValueError(f"scale_drift deve estar em (-0.1, 0.1) (recebido: {self.scale_drift})")
        if self.occlusion is not None:
            start, end = self.occlusion
            if not 1 <= start < end:
                raise ValueError(f"Intervalo de oclusão inválido: [{start}, {end})")

    def occluded(self, frame_number: int) -> bool:
        """Se o quadro (1-based) está no intervalo de oclusão."""
        return self.occlusion is not None and self.occlusion[0] <= frame_number < self.occlusion[1]

    @property
    def attributes(self) -> List[str]:
        tags = []
        if self.occlusion is not None:
            tags.append("OCC")
        if self.scale_drift != 0.0:
            tags.append("SV")
        return tags


def _trajectory(params: SynthParams) -> List[BoundingBox]:
    """Boxes inteiras do alvo: centro com velocidade constante, refletido nas bordas."""
    base_w, base_h = params.target_size
    cx, cy = params.width / 2.0, params.height / 2.0
    vx, vy = params.velocity
    scale = 1.0
    boxes = []
    for _ in range(params.frames):
        w = max(MIN_TARGET_SIDE, min(params.width, int(np.floor(base_w * scale + 0.5))))
        h = max(MIN_TARGET_SIDE, min(params.height, int(np.floor(base_h * scale + 0.5))))
        x = int(np.floor(cx - w / 2.0 + 0.5))
        y = int(np.floor(cy - h / 2.0 + 0.5))
        x = min(max(x, 0), params.width - w)
        y = min(max(y, 0), params.height - h)
        boxes.append(BoundingBox(float(x), float(y), float(w), float(h)))

        cx, vx = _reflect(cx + vx, vx, w / 2.0, params.width - w / 2.0)
        cy, vy = _reflect(cy + vy, vy, h / 2.0, params.height - h / 2.0)
        scale = min(max(scale * (1.0 + params.scale_drift), 0.5), 2.0)
    return boxes


def _reflect(position: float, velocity: float, low: float, high: float) -> Tuple[float, float]:
    if position < low:
        return 2.0 * low - position, -velocity
    if position > high:
        return 2.0 * high - position, -velocity
    return position, velocity


def render_frames(params: SynthParams, seed: int) -> Tuple[List[np.ndarray], List[BoundingBox], List[bool]]:
    """
    Renderiza os quadros em memória.

    Returns:
        Tupla (quadros uint8 (H, W), boxes 0-based, flags de oclusão)
    """
    rng = np.random.default_rng(seed)
    background = smooth_field(rng, params.width, params.height, cells=8)
    texture = block_texture(rng, *params.target_size)
    occluder_level = rng.uniform(60.0, 200.0)

    frames, flags = [], []
    boxes = _trajectory(params)
    for number, box in enumerate(boxes, start=1):
        canvas = background.copy()
        x, y, w, h = (int(v) for v in (box.x, box.y, box.w, box.h))
        patch = texture if (w, h) == params.target_size else resample(texture, w, h)
        canvas[y:y + h, x:x + w] = patch
        occluded = params.occluded(number)
        if occluded:
            left, top = max(0, x - OCCLUDER_MARGIN), max(0, y - OCCLUDER_MARGIN)
            right = min(params.width, x + w + OCCLUDER_MARGIN)
            bottom = min(params.height, y + h + OCCLUDER_MARGIN)
            canvas[top:bottom, left:right] = occluder_level
        frames.append(quantize(canvas, rng, params.noise_sigma))
        flags.append(occluded)
    return frames, boxes, flags


def synth_sequence(params: SynthParams, seed: int, out_dir: Union[str, Path]) -> Sequence:
    """
    Grava uma sequência sintética no layout OTB.

    Gera img/NNNN.pgm, groundtruth_rect.txt (1-based), occlusion.txt e, quando há
    oclusão ou variação de escala, attributes.txt.

    Args:
        params: Parâmetros da sequência
        seed: Semente (mesma semente, mesmos bytes)
        out_dir: Pasta de destino (criada se necessário)

    Returns:
        Sequence: A sequência recarregada do disco
    """
    root = Path(out_dir)
    image_dir = root / IMAGE_DIR
    image_dir.mkdir(parents=True, exist_ok=True)

    frames, boxes, flags = render_frames(params, seed)
    digits = max(4, len(str(len(frames))))
    for number, frame in enumerate(frames, start=1):
        save_image(ImageBuffer.from_array(frame), image_dir / f"{number:0{digits}d}.pgm")

    (root / GROUNDTRUTH_FILE).write_text("".join(f"{format_box_line(box)}\n" for box in boxes), encoding="utf-8")
    (root / OCCLUSION_FILE).write_text("".join(f"{int(flag)}\n" for flag in flags), encoding="utf-8")
    if params.attributes:
        (root / ATTRIBUTES_FILE).write_text(",".join(params.attributes) + "\n", encoding="utf-8")

    logger.info(f"Sequência sintética gravada em {root}: {len(frames)} quadros, seed={seed}, "
                f"oclusão={params.occlusion}, atributos={params.attributes}")
    return load_sequence(root)


def synth_corpus(out_dir: Union[str, Path], count: int, size: int, seed: int) -> Tuple[int, int]:
    """
    Grava um corpus de objectness: out_dir/object e out_dir/background com count PGMs cada.

    Returns:
        Tupla (número de objetos, número de fundos)
    """
    root = Path(out_dir)
    patches, labels = synthetic_objectness_corpus(count, size, seed)
    counters = {OBJECT_DIR: 0, BACKGROUND_DIR: 0}
    for patch, label in zip(patches, labels):
        folder = OBJECT_DIR if label > 0.5 else BACKGROUND_DIR
        counters[folder] += 1
        (root / folder).mkdir(parents=True, exist_ok=True)
        save_image(ImageBuffer.from_array(patch), root / folder / f"{counters[folder]:05d}.pgm")
    logger.info(f"Corpus de objectness gravado em {root}: {counters[OBJECT_DIR]} objetos, {counters[BACKGROUND_DIR]} fundos")
    return counters[OBJECT_DIR], counters[BACKGROUND_DIR]
