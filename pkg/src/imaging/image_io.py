"""Leitura e escrita de imagens PGM (P5) e PPM (P6) binárias."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from ..errors import ImageFormatError

logger = logging.getLogger(__name__)

SUPPORTED_MAGIC = {"P5": 1, "P6": 3}
MAX_VALUE = 255


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """
    Imagem decodificada, row-major, 8 bits por amostra.

    Attributes:
        width: Largura em pixels
        height: Altura em pixels
        channels: 1 (cinza) ou 3 (cor)
        data: Array uint8 com shape (height, width, channels)
    """

    width: int
    height: int
    channels: int
    data: np.ndarray

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise ImageFormatError(f"Número de canais inválido: {self.channels}", token=str(self.channels))
        expected = (self.height, self.width, self.channels)
        if self.data.shape != expected or self.data.dtype != np.uint8:
            raise ImageFormatError(
                f"Dados da imagem com shape {self.data.shape}/{self.data.dtype}, esperado {expected}/uint8"
            )

    @classmethod
    def from_array(cls, array: np.ndarray) -> "ImageBuffer":
        """
        Cria um ImageBuffer a partir de um array (H, W) ou (H, W, C).

        Args:
            array: Array numérico; valores são arredondados e limitados a [0, 255]

        Returns:
            ImageBuffer: Imagem correspondente
        """
        data = np.asarray(array)
        if data.dtype != np.uint8:
            data = np.clip(np.floor(data.astype(np.float64) + 0.5), 0, MAX_VALUE).astype(np.uint8)
        if data.ndim == 2:
            data = data[:, :, None]
        height, width, channels = data.shape
        return cls(width=width, height=height, channels=channels, data=np.ascontiguousarray(data))

    @property
    def dims(self) -> Tuple[int, int]:
        """(largura, altura)."""
        return self.width, self.height

    def plane(self) -> np.ndarray:
        """Retorna a imagem como array (H, W) quando em tons de cinza, senão (H, W, C)."""
        if self.channels == 1:
            return self.data[:, :, 0]
        return self.data

    def tobytes(self) -> bytes:
        return self.data.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.channels == other.channels
            and np.array_equal(self.data, other.data)
        )


def _read_header(raw: bytes, path: Union[str, Path]) -> Tuple[List[str], int]:
    """
    Lê os quatro tokens do cabeçalho (magic, largura, altura, maxval).

    Returns:
        Tupla (tokens, offset do primeiro byte de dados)
    """
    tokens: List[str] = []
    pos = 0
    size = len(raw)
    while len(tokens) < 4:
        # Pular espaços e comentários
        while pos < size:
            char = raw[pos:pos + 1]
            if char.isspace():
                pos += 1
            elif char == b"#":
                while pos < size and raw[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        if pos >= size:
            raise ImageFormatError(f"Cabeçalho incompleto em {path}", token="EOF")
        start = pos
        while pos < size and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(raw[start:pos].decode("ascii", errors="replace"))
        if len(tokens) == 1 and tokens[0] not in SUPPORTED_MAGIC:
            raise ImageFormatError(f"Formato não suportado '{tokens[0]}' em {path} (apenas P5/P6)", token=tokens[0])

    # Exatamente um caractere de espaço separa o cabeçalho dos dados
    if pos >= size or not raw[pos:pos + 1].isspace():
        raise ImageFormatError(f"Cabeçalho sem separador antes dos dados em {path}", token=tokens[-1])
    return tokens, pos + 1


def load_image(path: Union[str, Path]) -> ImageBuffer:
    """
    Decodifica um arquivo PGM (P5) ou PPM (P6) binário com maxval 255.

    Args:
        path: Caminho do arquivo

    Returns:
        ImageBuffer: Imagem com 1 canal (P5) ou 3 canais (P6)

    Raises:
        ImageFormatError: Se o arquivo não puder ser lido ou o cabeçalho for inválido
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise ImageFormatError(f"Não foi possível ler a imagem {path}: {e}") from e

    tokens, offset = _read_header(raw, path)
    magic, width_token, height_token, maxval_token = tokens
    channels = SUPPORTED_MAGIC[magic]

    dims = []
    for token in (width_token, height_token):
        if not token.isdigit() or int(token) < 1:
            raise ImageFormatError(f"Dimensão inválida '{token}' em {path}", token=token)
        dims.append(int(token))
    width, height = dims

    if maxval_token != str(MAX_VALUE):
        raise ImageFormatError(f"maxval '{maxval_token}' não suportado em {path} (apenas 255)", token=maxval_token)

    expected = width * height * channels
    payload = raw[offset:offset + expected]
    if len(payload) != expected:
        raise ImageFormatError(
            f"Dados truncados em {path}: esperado {expected} bytes, encontrado {len(payload)}",
            token=str(len(payload)),
        )

    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels).copy()
    logger.debug(f"Imagem {path} carregada: {width}x{height}x{channels}")
    return ImageBuffer(width=width, height=height, channels=channels, data=data)


def save_image(img: ImageBuffer, path: Union[str, Path]) -> None:
    """
    Grava a imagem como P5 (1 canal) ou P6 (3 canais) com maxval 255.

    Args:
        img: Imagem a gravar
        path: Caminho de destino
    """
    magic = "P5" if img.channels == 1 else "P6"
    header = f"{magic}\n{img.width} {img.height}\n{MAX_VALUE}\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    """
    Converte para tons de cinza pela média dos canais (arredondamento half-up).

    Args:
        img: Imagem de 1 ou 3 canais

    Returns:
        ImageBuffer: Imagem de 1 canal (a própria imagem se já for cinza)
    """
    if img.channels == 1:
        return img
    total = img.data.astype(np.int64).sum(axis=2)
    # round-half-up de total/3 em aritmética inteira
    gray = ((2 * total + 3) // 6).astype(np.uint8)
    return ImageBuffer.from_array(gray)
