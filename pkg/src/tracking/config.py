"""Configuração do rastreador e leitura de arquivos `chave = valor`."""

import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from dotenv.parser import parse_stream

from ..appearance.gaussian import CROSS_TERMS, UpdateConfig
from ..errors import ConfigError, NetworkConfigError
from ..network.backbone import ACTIVATIONS, NetworkConfig, parse_conv_spec
from ..sampling.sampler import SamplerConfig

logger = logging.getLogger(__name__)

# a semente é gravada como int64 nos arquivos de estado
MAX_SEED = 2 ** 63 - 1


@dataclass(frozen=True)
class TrackerConfig:
    """
    Parâmetros do rastreador.

    A semente é única: ela também define a inicialização da rede e o gerador
    de amostragem (sampler.rng_seed e network.seed são alinhados a ela).

    Attributes:
        sampler: Amostragem dos lotes
        update: Atualização EMA das Gaussianas
        network: Arquitetura usada quando não há pesos
        fc_learning_rate: Taxa de aprendizado de fc6/fc7
        init_iterations: Máximo de iterações de ajuste no primeiro quadro
        online_iterations: Passos de backprop por quadro aceito
        score_gate: Score mínimo para atualizar
        similarity_threshold: Cosseno mínimo contra a última atualização
        grad_clip_norm: Norma L2 máxima dos gradientes (0 desativa)
        early_stop_window: Janela de iterações do critério de platô
        early_stop_tolerance: Variação relativa mínima do gap pos-neg na janela
        seed: Semente global
        pretrain: Executa o pré-treino de objectness quando não há pesos
        pretrain_iterations: Iterações do pré-treino em memória
        pretrain_learning_rate: Taxa do pré-treino
        pretrain_batch_size: Lote do pré-treino
        pretrain_corpus_size: Patches por classe do corpus sintético em memória
        weights: Arquivo GDTW de pesos (opcional)
        freeze_net: Não atualiza fc6/fc7 durante o rastreamento
        freeze_gaussians: Não atualiza as Gaussianas durante o rastreamento
        debug: Guarda o FrameReport de cada quadro no estado
    """

    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    update: UpdateConfig = field(default_factory=UpdateConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    fc_learning_rate: float = 1e-3
    init_iterations: int = 500
    online_iterations: int = 1
    score_gate: float = 0.0
    similarity_threshold: float = 0.5
    grad_clip_norm: float = 5.0
    early_stop_window: int = 20
    early_stop_tolerance: float = 1e-3
    seed: int = 0
    pretrain: bool = True
    pretrain_iterations: int = 60
    pretrain_learning_rate: float = 0.01
    pretrain_batch_size: int = 32
    pretrain_corpus_size: int = 64
    weights: Optional[str] = None
    freeze_net: bool = False
    freeze_gaussians: bool = False
    debug: bool = False

    def __post_init__(self):
        for name in ("init_iterations", "online_iterations", "pretrain_iterations", "early_stop_window"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} não pode ser negativo (recebido: {getattr(self, name)})")
        for name in ("pretrain_batch_size", "pretrain_corpus_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} deve ser >= 1 (recebido: {getattr(self, name)})")
        for name in ("fc_learning_rate", "pretrain_learning_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} deve ser maior que 0 (recebido: {getattr(self, name)})")
        for name in ("score_gate", "similarity_threshold", "grad_clip_norm", "early_stop_tolerance"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} deve ser finito (recebido: {getattr(self, name)})")
        if self.sampler.n_pos < 2 or self.sampler.n_neg < 2:
            raise ValueError("n_pos e n_neg devem ser >= 2 para estimar as Gaussianas")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed deve estar entre 0 e {MAX_SEED} (recebido: {self.seed})")
        if self.sampler.rng_seed != self.seed:
            object.__setattr__(self, "sampler", replace(self.sampler, rng_seed=self.seed))
        if self.network.seed != self.seed:
            object.__setattr__(self, "network", replace(self.network, seed=self.seed))

    def with_seed(self, seed: int) -> "TrackerConfig":
        return replace(self, seed=seed)

    def with_overrides(self, **changes: Any) -> "TrackerConfig":
        """Cópia com campos de topo ou de sampler/update/network substituídos pelo nome."""
        return apply_settings(self, changes)


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on", "sim"):
        return True
    if value in ("0", "false", "no", "off", "nao", "não"):
        return False
    raise ValueError(f"valor booleano inválido '{text}'")


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _parse_optional_path(text: str) -> Optional[str]:
    return None if text.strip().lower() in ("", "none") else text.strip()


def _choice(options: Tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip()
        if value not in options:
            raise ValueError(f"'{value}' não é uma opção válida ({', '.join(options)})")
        return value
    return parse


# chave -> (grupo, conversor); grupo None é o próprio TrackerConfig
KEYS: Dict[str, Tuple[Optional[str], Callable[[str], Any]]] = {
    "n_pos": ("sampler", int),
    "n_neg": ("sampler", int),
    "pos_min_iou": ("sampler", float),
    "neg_max_iou": ("sampler", float),
    "neg_min_center_dist": ("sampler", float),
    "search_radius_factor": ("sampler", float),
    "search_radius": ("sampler", _parse_optional_float),
    "n_candidates": ("sampler", int),
    "n_scales": ("sampler", int),
    "scale_step": ("sampler", float),
    "gamma": ("update", float),
    "variance_floor": ("update", float),
    "variance_cross_term": ("update", _choice(CROSS_TERMS)),
    "input_size": ("network", int),
    "input_channels": ("network", int),
    "conv_spec": ("network", parse_conv_spec),
    "fc6_dim": ("network", int),
    "feature_dim": ("network", int),
    "fc7_activation": ("network", _choice(ACTIVATIONS)),
    "fc_learning_rate": (None, float),
    "init_iterations": (None, int),
    "online_iterations": (None, int),
    "score_gate": (None, float),
    "similarity_threshold": (None, float),
    "grad_clip_norm": (None, float),
    "early_stop_window": (None, int),
    "early_stop_tolerance": (None, float),
    "seed": (None, int),
    "pretrain": (None, _parse_bool),
    "pretrain_iterations": (None, int),
    "pretrain_learning_rate": (None, float),
    "pretrain_batch_size": (None, int),
    "pretrain_corpus_size": (None, int),
    "weights": (None, _parse_optional_path),
    "freeze_net": (None, _parse_bool),
    "freeze_gaussians": (None, _parse_bool),
    "debug": (None, _parse_bool),
}


def apply_settings(base: TrackerConfig, settings: Mapping[str, Any]) -> TrackerConfig:
    """
    Aplica valores já convertidos sobre uma configuração.

    Raises:
        ConfigError: Chave desconhecida ou valor que viola as invariantes
    """
    groups: Dict[Optional[str], Dict[str, Any]] = {None: {}, "sampler": {}, "update": {}, "network": {}}
    for key, value in settings.items():
        if key not in KEYS:
            raise ConfigError(f"Chave de configuração desconhecida: '{key}'", key=key)
        groups[KEYS[key][0]][key] = value

    try:
        top = dict(groups[None])
        for group in ("sampler", "update", "network"):
            if groups[group]:
                top[group] = replace(getattr(base, group), **groups[group])
        return replace(base, **top)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Configuração inválida: {e}") from e


def parse_config_values(values: Mapping[str, Optional[str]]) -> Dict[str, Any]:
    """
    Converte os textos lidos do arquivo para os tipos de cada chave.

    Raises:
        ConfigError: Chave desconhecida, sem valor ou com valor inválido
    """
    parsed: Dict[str, Any] = {}
    for key, text in values.items():
        if key not in KEYS:
            raise ConfigError(f"Chave de configuração desconhecida: '{key}'", key=key)
        if text is None:
            raise ConfigError(f"Chave '{key}' sem valor (use 'chave = valor')", key=key)
        try:
            parsed[key] = KEYS[key][1](text)
        except (ValueError, NetworkConfigError) as e:
            raise ConfigError(f"Valor inválido para '{key}': {e}", key=key) from e
    return parsed


def read_config_lines(config_path: Path) -> Dict[str, Optional[str]]:
    """
    Lê as linhas `chave = valor` do arquivo com o parser do python-dotenv.

    Returns:
        Dict chave -> texto (None para chave sem `=`); a última ocorrência vale

    Raises:
        ConfigError: Arquivo não UTF-8 ou linha fora do formato `chave = valor`
    """
    values: Dict[str, Optional[str]] = {}
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            for binding in parse_stream(f):
                if binding.error:
                    line = binding.original.line
                    error_msg = (
                        f"Linha {line} de {config_path} fora do formato 'chave = valor': "
                        f"{binding.original.string.strip()!r}"
                    )
                    logger.error(error_msg)
                    raise ConfigError(error_msg, line_number=line)
                if binding.key is not None:
                    values[binding.key] = binding.value
    except UnicodeDecodeError as e:
        raise ConfigError(f"Arquivo de configuração não é UTF-8 válido: {config_path}") from e
    return values


def load_tracker_config(path: Optional[Union[str, Path]] = None, base: Optional[TrackerConfig] = None) -> TrackerConfig:
    """
    Lê um arquivo de configuração UTF-8 com linhas `chave = valor` e comentários `#`.

    Args:
        path: Caminho do arquivo (None devolve a configuração base)
        base: Configuração sobre a qual os valores são aplicados (padrão: TrackerConfig())

    Returns:
        TrackerConfig: Configuração validada

    Raises:
        ConfigError: Arquivo ilegível, chave desconhecida ou valor inválido
    """
    base = base or TrackerConfig()
    if path is None:
        return base
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Arquivo de configuração não encontrado: {config_path}")

    values = read_config_lines(config_path)
    config = apply_settings(base, parse_config_values(values))
    logger.info(f"Configuração carregada de {config_path}: {len(values)} chaves")
    return config


def config_summary(config: TrackerConfig) -> Dict[str, Any]:
    """Valores de topo da configuração, para logs e resultados de comandos."""
    summary = {item.name: getattr(config, item.name) for item in fields(config)
               if item.name not in ("sampler", "update", "network")}
    summary["n_candidates"] = config.sampler.n_candidates
    summary["gamma"] = config.update.gamma
    summary["feature_dim"] = config.network.feature_dim
    return summary
