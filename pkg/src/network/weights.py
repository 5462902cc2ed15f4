"""Contêiner binário GDTW para pesos e estado do rastreador.

Layout (little-endian):
    magic "GDTW" | u32 versão (=2) | u32 número de tensores
    por tensor: u16 tamanho do nome + nome UTF-8 | u8 tipo (0 = f64, 1 = i64) | u8 ndim | ndim x u32 dims | valores

A versão 1, sem o byte de tipo e só com f64, continua legível.
"""

import logging
import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from ..errors import WeightFormatError
from .backbone import ConvStage, Network, NetworkConfig, ACTIVATIONS

logger = logging.getLogger(__name__)

MAGIC = b"GDTW"
VERSION = 2
READABLE_VERSIONS = (1, 2)
NETWORK_META = "meta/network"

# código do tipo -> dtype little-endian
DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<i8")}


def _dtype_code(tensor: np.ndarray) -> int:
    return 1 if np.issubdtype(np.asarray(tensor).dtype, np.integer) else 0


def write_container(path: Union[str, Path], tensors: Mapping[str, np.ndarray]) -> None:
    """
    Grava tensores nomeados no formato GDTW, na ordem do mapeamento.

    Args:
        path: Caminho de destino
        tensors: Tensores por nome (inteiros viram int64, o resto float64)
    """
    chunks = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, tensor in tensors.items():
        code = _dtype_code(tensor)
        array = np.asarray(tensor, dtype=DTYPES[code])
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<BB", code, array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
        chunks.append(np.ascontiguousarray(array).tobytes())
    Path(path).write_bytes(b"".join(chunks))
    logger.debug(f"Contêiner GDTW gravado em {path} com {len(tensors)} tensores")


class _Reader:
    """Cursor sobre os bytes do arquivo com erros que informam offset e seção."""

    def __init__(self, raw: bytes):
        self.raw = raw
        self.offset = 0
        self.section = None

    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.raw):
            raise WeightFormatError(
                f"Arquivo truncado ao ler {what}: faltam {end - len(self.raw)} bytes",
                offset=self.offset,
                section=self.section,
            )
        chunk = self.raw[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def read_container(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """
    Lê todos os tensores de um arquivo GDTW.

    Returns:
        Dict ordenado de tensores por nome (float64 ou int64)

    Raises:
        WeightFormatError: Magic inválido, versão não suportada, tipo desconhecido, arquivo truncado ou nome duplicado
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise WeightFormatError(f"Não foi possível ler {path}: {e}") from e

    reader = _Reader(raw)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise WeightFormatError(f"Magic inválido {magic!r} em {path}, esperado {MAGIC!r}", offset=0)
    (version,) = reader.unpack("<I", "versão")
    if version not in READABLE_VERSIONS:
        raise WeightFormatError(f"Versão {version} não suportada em {path} (esperado {VERSION})", offset=4)
    (count,) = reader.unpack("<I", "número de tensores")

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_length,) = reader.unpack("<H", "tamanho do nome")
        try:
            name = reader.take(name_length, "nome").decode("utf-8")
        except UnicodeDecodeError as e:
            raise WeightFormatError(f"Nome de tensor não é UTF-8 válido: {e}", offset=reader.offset) from e
        reader.section = name
        code = 0
        if version >= 2:
            type_offset = reader.offset
            (code,) = reader.unpack("<B", "tipo")
            if code not in DTYPES:
                raise WeightFormatError(f"Código de tipo {code} desconhecido", offset=type_offset, section=name)
        (ndim,) = reader.unpack("<B", "ndim")
        dims = reader.unpack(f"<{ndim}I", "dimensões") if ndim else ()
        size = int(np.prod(dims)) if dims else 1
        dtype = DTYPES[code]
        values = np.frombuffer(reader.take(size * dtype.itemsize, "valores"), dtype=dtype).astype(dtype.newbyteorder("="))
        if name in tensors:
            raise WeightFormatError("Tensor duplicado", offset=reader.offset, section=name)
        tensors[name] = values.reshape(dims)
        reader.section = None

    if reader.offset != len(raw):
        raise WeightFormatError(f"{len(raw) - reader.offset} bytes excedentes após o último tensor", offset=reader.offset)
    return tensors


def _config_to_tensor(config: NetworkConfig) -> np.ndarray:
    values = [
        config.input_size,
        config.input_channels,
        config.fc6_dim,
        config.feature_dim,
        ACTIVATIONS.index(config.fc7_activation),
        config.seed,
        len(config.conv_spec),
    ]
    for stage in config.conv_spec:
        values.extend([stage.kernel, stage.stride, stage.out_channels])
    return np.array(values, dtype=np.int64)


def _config_from_tensor(values: np.ndarray, section: str) -> NetworkConfig:
    try:
        numbers = [int(v) for v in values.ravel()]
        input_size, input_channels, fc6_dim, feature_dim, activation, seed, stages = numbers[:7]
        spec = numbers[7:]
        if len(spec) != 3 * stages:
            raise ValueError(f"esperados {3 * stages} valores de estágios, encontrados {len(spec)}")
        conv_spec = tuple(ConvStage(*spec[i:i + 3]) for i in range(0, len(spec), 3))
        return NetworkConfig(
            input_size=input_size,
            input_channels=input_channels,
            conv_spec=conv_spec,
            fc6_dim=fc6_dim,
            feature_dim=feature_dim,
            fc7_activation=ACTIVATIONS[activation],
            seed=seed,
        )
    except (ValueError, IndexError) as e:
        raise WeightFormatError(f"Configuração de rede inválida: {e}", section=section) from e


def network_to_tensors(net: Network, prefix: str = "") -> Dict[str, np.ndarray]:
    """Tensores da rede (configuração primeiro), com prefixo opcional de seção."""
    tensors = {f"{prefix}{NETWORK_META}": _config_to_tensor(net.config)}
    for name, value in net.params.items():
        tensors[f"{prefix}{name}"] = value
    return tensors


def network_from_tensors(tensors: Mapping[str, np.ndarray], prefix: str = "") -> Network:
    """
    Reconstrói a rede a partir dos tensores do contêiner.

    Raises:
        WeightFormatError: Configuração ausente, parâmetro faltando ou shape divergente do cabeçalho
    """
    meta_name = f"{prefix}{NETWORK_META}"
    if meta_name not in tensors:
        raise WeightFormatError("Configuração de rede ausente", section=meta_name)
    config = _config_from_tensor(tensors[meta_name], meta_name)
    try:
        shapes = config.param_shapes()
    except ValueError as e:
        raise WeightFormatError(f"Configuração de rede incoerente: {e}", section=meta_name) from e

    params: Dict[str, np.ndarray] = {}
    for name, shape in shapes.items():
        key = f"{prefix}{name}"
        if key not in tensors:
            raise WeightFormatError("Parâmetro ausente", section=key)
        value = tensors[key]
        if value.shape != shape:
            raise WeightFormatError(f"Shape {value.shape} diverge do esperado {shape}", section=key)
        params[name] = value.copy()
    return Network(config=config, params=params)


def save_weights(net: Network, path: Union[str, Path]) -> None:
    """
    Salva a rede em um arquivo GDTW.

    Args:
        net: Rede
        path: Caminho de destino
    """
    write_container(path, network_to_tensors(net))
    logger.info(f"Pesos salvos em {path}")


def load_weights(path: Union[str, Path]) -> Network:
    """
    Carrega uma rede de um arquivo GDTW.

    Raises:
        WeightFormatError: Se o arquivo for inválido
    """
    net = network_from_tensors(read_container(path))
    logger.info(f"Pesos carregados de {path}")
    return net
