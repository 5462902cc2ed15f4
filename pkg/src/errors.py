"""Exceções do rastreador GDT.

Todas herdam de ``ValueError`` para que os serviços tratem entrada inválida
da mesma forma que as validações simples feitas com ``ValueError``.
"""

from typing import Optional


class GdtError(ValueError):
    """Erro base do pacote."""


class ImageFormatError(GdtError):
    """Arquivo de imagem com cabeçalho ou conteúdo inválido."""

    def __init__(self, message: str, token: Optional[str] = None):
        super().__init__(message)
        self.token = token


class GeometryError(GdtError):
    """Bounding box ou geometria incompatível com a imagem."""


class NetworkConfigError(GdtError):
    """Configuração de rede incoerente (ex: colapso espacial)."""

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.stage = stage


class DimensionMismatchError(GdtError):
    """Dimensões de vetores, patches ou lotes não conferem."""


class StaleCacheError(GdtError):
    """ForwardCache não corresponde à rede usada no backward."""


class NumericError(GdtError):
    """Valores não finitos (NaN/Inf) em gradientes ou perdas."""


class WeightFormatError(GdtError):
    """Arquivo GDTW malformado."""

    def __init__(self, message: str, offset: Optional[int] = None, section: Optional[str] = None):
        details = []
        if section is not None:
            details.append(f"seção '{section}'")
        if offset is not None:
            details.append(f"offset {offset}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)
        self.offset = offset
        self.section = section


class SamplingError(GdtError):
    """Amostragem de bounding boxes impossível ou esgotada."""


class SequenceFormatError(GdtError):
    """Sequência em disco com layout ou anotação inválida."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"{message} (linha {line_number})"
        super().__init__(message)
        self.line_number = line_number


class ConfigError(GdtError):
    """Arquivo de configuração com chave, valor ou linha inválidos."""

    def __init__(self, message: str, key: Optional[str] = None, line_number: Optional[int] = None):
        super().__init__(message)
        self.key = key
        self.line_number = line_number
