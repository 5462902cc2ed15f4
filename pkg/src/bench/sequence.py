"""Sequências no layout OTB e arquivos de resultados.

Layout de uma sequência:
    img/0001.pgm ...        quadros numerados (PGM ou PPM)
    groundtruth_rect.txt    x,y,w,h por linha, 1-based, vírgula ou espaço
    attributes.txt          opcional, tags separadas por vírgula (ex: OCC,SV)
    occlusion.txt           opcional, um 0/1 por quadro

As coordenadas 1-based são convertidas para 0-based apenas aqui; o resto do
pacote trabalha em 0-based.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Union

from ..errors import GdtError, SequenceFormatError
from ..imaging.geometry import BoundingBox

logger = logging.getLogger(__name__)

ATTRIBUTES = frozenset({"IV", "OCC", "SV", "DEF", "MB", "FM", "IPR", "OPR", "OV", "BC", "LR"})
FRAME_SUFFIXES = (".pgm", ".ppm")
GROUNDTRUTH_FILE = "groundtruth_rect.txt"
ATTRIBUTES_FILE = "attributes.txt"
OCCLUSION_FILE = "occlusion.txt"
IMAGE_DIR = "img"

_SEPARATOR = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class Sequence:
    """
    Sequência carregada do disco.

    Attributes:
        name: Nome da pasta
        frames: Caminhos dos quadros em ordem
        gt: Boxes 0-based, uma por quadro
        attributes: Tags de atributos visuais
        occlusion: Flags de oclusão por quadro, quando anotadas
    """

    name: str
    frames: List[Path]
    gt: List[BoundingBox]
    attributes: FrozenSet[str] = frozenset()
    occlusion: Optional[List[bool]] = field(default=None)

    def __post_init__(self):
        if len(self.frames) != len(self.gt):
            raise SequenceFormatError(f"{len(self.frames)} quadros e {len(self.gt)} linhas de ground truth")

    def __len__(self) -> int:
        return len(self.frames)


def parse_box_line(line: str, line_number: int) -> BoundingBox:
    """
    Converte uma linha 'x,y,w,h' 1-based em uma box 0-based.

    Raises:
        SequenceFormatError: Se a linha não tiver 4 números válidos
    """
    tokens = [token for token in _SEPARATOR.split(line.strip()) if token]
    if len(tokens) != 4:
        raise SequenceFormatError(f"Esperados 4 valores, encontrados {len(tokens)}: '{line.strip()}'", line_number)
    try:
        x, y, w, h = (float(token) for token in tokens)
        return BoundingBox(x - 1.0, y - 1.0, w, h)
    except (ValueError, GdtError) as e:
        raise SequenceFormatError(f"Box inválida '{line.strip()}': {e}", line_number) from e


def read_boxes(path: Union[str, Path]) -> List[BoundingBox]:
    """
    Lê um arquivo de boxes 1-based (ground truth ou resultados); linhas vazias são ignoradas.

    Raises:
        SequenceFormatError: Arquivo ausente ou linha malformada (com o número da linha)
    """
    box_path = Path(path)
    if not box_path.is_file():
        raise SequenceFormatError(f"Arquivo de boxes não encontrado: {box_path}")
    boxes = []
    for line_number, line in enumerate(box_path.read_text(encoding="utf-8").splitlines(), start=1):
        if line.strip():
            boxes.append(parse_box_line(line, line_number))
    return boxes


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def format_box_line(box: BoundingBox) -> str:
    """Box 0-based -> linha 'x,y,w,h' 1-based com inteiros arredondados (round-half-up)."""
    return ",".join(str(_round_half_up(v)) for v in (box.x + 1.0, box.y + 1.0, box.w, box.h))


def write_results(path: Union[str, Path], boxes: Iterable[BoundingBox]) -> None:
    """
    Grava um results.txt: uma linha 'x,y,w,h' 1-based por quadro.

    Args:
        path: Caminho de destino
        boxes: Boxes 0-based
    """
    lines = [format_box_line(box) for box in boxes]
    Path(path).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    logger.info(f"Resultados gravados em {path}: {len(lines)} quadros")


def read_results(path: Union[str, Path]) -> List[BoundingBox]:
    """Lê um results.txt (mesmo formato do ground truth)."""
    return read_boxes(path)


def _frame_number(path: Path) -> int:
    digits = re.sub(r"\D", "", path.stem)
    return int(digits) if digits else -1


def _read_attributes(path: Path) -> FrozenSet[str]:
    if not path.is_file():
        return frozenset()
    tags = set()
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        for tag in (token.strip().upper() for token in _SEPARATOR.split(line) if token.strip()):
            if tag not in ATTRIBUTES:
                raise SequenceFormatError(f"Atributo desconhecido '{tag}' em {path}", line_number)
            tags.add(tag)
    return frozenset(tags)


def _read_occlusion(path: Path, expected: int) -> Optional[List[bool]]:
    if not path.is_file():
        return None
    flags = []
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        value = line.strip()
        if not value:
            continue
        if value not in ("0", "1"):
            raise SequenceFormatError(f"Flag de oclusão inválida '{value}' em {path}", line_number)
        flags.append(value == "1")
    if len(flags) != expected:
        raise SequenceFormatError(f"{path} tem {len(flags)} flags para {expected} quadros")
    return flags


def load_sequence(directory: Union[str, Path]) -> Sequence:
    """
    Carrega uma sequência no layout OTB.

    Args:
        directory: Pasta com img/ e groundtruth_rect.txt

    Returns:
        Sequence: Quadros ordenados, ground truth 0-based, atributos e oclusão

    Raises:
        SequenceFormatError: Pasta incompleta, linha malformada ou contagem divergente
    """
    root = Path(directory)
    image_dir = root / IMAGE_DIR
    if not image_dir.is_dir():
        raise SequenceFormatError(f"Pasta de quadros não encontrada: {image_dir}")
    frames = sorted(
        (path for path in image_dir.iterdir() if path.suffix.lower() in FRAME_SUFFIXES),
        key=lambda path: (_frame_number(path), path.name),
    )
    if not frames:
        raise SequenceFormatError(f"Nenhum quadro PGM/PPM em {image_dir}")

    gt = read_boxes(root / GROUNDTRUTH_FILE)
    if len(gt) != len(frames):
        raise SequenceFormatError(
            f"Sequência {root.name}: {len(frames)} quadros e {len(gt)} linhas em {GROUNDTRUTH_FILE}"
        )
    sequence = Sequence(
        name=root.name,
        frames=frames,
        gt=gt,
        attributes=_read_attributes(root / ATTRIBUTES_FILE),
        occlusion=_read_occlusion(root / OCCLUSION_FILE, len(frames)),
    )
    logger.info(f"Sequência {sequence.name} carregada: {len(frames)} quadros, atributos {sorted(sequence.attributes)}")
    return sequence
