"""Persistência do estado do rastreador no contêiner GDTW."""

import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import numpy as np

from ..appearance.gaussian import DiagonalGaussian
from ..appearance.model import AppearanceModel
from ..errors import GdtError, WeightFormatError
from ..imaging.geometry import BoundingBox
from ..network.weights import network_from_tensors, network_to_tensors, read_container, write_container
from .config import TrackerConfig
from .tracker import TrackerState

logger = logging.getLogger(__name__)

NET_PREFIX = "net/"
BOX_SECTION = "box/current"
META_SECTION = "state/meta"
SEED_SECTION = "state/seed"
FEATURE_SECTION = "state/last_update_feature"
GAUSSIAN_SECTIONS = ("gauss_pos", "gauss_neg")
REQUIRED_SECTIONS = (
    f"{NET_PREFIX}meta/network",
    "gauss_pos/mu",
    "gauss_pos/var",
    "gauss_neg/mu",
    "gauss_neg/var",
    BOX_SECTION,
    META_SECTION,
    SEED_SECTION,
    FEATURE_SECTION,
)

# state/meta: initial_aspect, frame_index, last_update_frame, freeze_net, freeze_gaussians
META_FIELDS = 5


def state_to_tensors(state: TrackerState) -> Dict[str, np.ndarray]:
    """Seções GDTW do estado: rede, Gaussianas, box e metadados."""
    tensors = network_to_tensors(state.net, prefix=NET_PREFIX)
    for section, gaussian in zip(GAUSSIAN_SECTIONS, (state.model.pos, state.model.neg)):
        tensors[f"{section}/mu"] = gaussian.mu
        tensors[f"{section}/var"] = gaussian.var
    tensors[BOX_SECTION] = state.current_box.to_array()
    tensors[META_SECTION] = np.array([
        state.initial_aspect,
        state.frame_index,
        state.last_update_frame,
        float(state.freeze_net),
        float(state.freeze_gaussians),
    ], dtype=np.float64)
    tensors[SEED_SECTION] = np.array([state.seed], dtype=np.int64)
    tensors[FEATURE_SECTION] = np.asarray(state.last_update_feature, dtype=np.float64)
    return tensors


def save_state(state: TrackerState, path: Union[str, Path]) -> None:
    """
    Salva o estado em um arquivo GDTW.

    Args:
        state: Estado do rastreador
        path: Caminho de destino
    """
    write_container(path, state_to_tensors(state))
    logger.info(f"Estado salvo em {path} (quadro {state.frame_index})")


def _gaussian(tensors: Mapping[str, np.ndarray], section: str, dim: int) -> DiagonalGaussian:
    mu, var = tensors[f"{section}/mu"], tensors[f"{section}/var"]
    for name, values in ((f"{section}/mu", mu), (f"{section}/var", var)):
        if values.shape != (dim,):
            raise WeightFormatError(f"Shape {values.shape} diverge de ({dim},)", section=name)
        if not np.all(np.isfinite(values)):
            raise WeightFormatError("Valores não finitos", section=name)
    if not np.all(var > 0):
        raise WeightFormatError("Variâncias não positivas", section=f"{section}/var")
    return DiagonalGaussian(mu=mu, var=var)


def state_from_tensors(tensors: Mapping[str, np.ndarray], config: Optional[TrackerConfig] = None) -> TrackerState:
    """
    Reconstrói o estado a partir das seções GDTW.

    Raises:
        WeightFormatError: Seção ausente ou com conteúdo incoerente
    """
    for section in REQUIRED_SECTIONS:
        if section not in tensors:
            raise WeightFormatError("Seção ausente; o arquivo não é um estado de rastreador", section=section)

    net = network_from_tensors(tensors, prefix=NET_PREFIX)
    dim = net.config.feature_dim
    pos = _gaussian(tensors, "gauss_pos", dim)
    neg = _gaussian(tensors, "gauss_neg", dim)

    box_values = tensors[BOX_SECTION]
    if box_values.shape != (4,):
        raise WeightFormatError(f"Shape {box_values.shape} diverge de (4,)", section=BOX_SECTION)
    try:
        box = BoundingBox(*(float(v) for v in box_values))
    except GdtError as e:
        raise WeightFormatError(f"Box inválida: {e}", section=BOX_SECTION) from e

    meta = tensors[META_SECTION]
    if meta.shape != (META_FIELDS,) or not np.all(np.isfinite(meta)):
        raise WeightFormatError(f"Metadados com shape {meta.shape}, esperado ({META_FIELDS},)", section=META_SECTION)
    initial_aspect, frame_index, last_update_frame, freeze_net, freeze_gaussians = meta.tolist()

    seed_values = tensors[SEED_SECTION]
    if seed_values.shape != (1,) or not np.issubdtype(seed_values.dtype, np.integer) or seed_values[0] < 0:
        raise WeightFormatError(
            f"Semente deve ser um inteiro não negativo (shape {seed_values.shape})", section=SEED_SECTION
        )
    seed = int(seed_values[0])

    feature = tensors[FEATURE_SECTION]
    if feature.shape != (dim,):
        raise WeightFormatError(f"Shape {feature.shape} diverge de ({dim},)", section=FEATURE_SECTION)

    if config is None:
        config = TrackerConfig(network=net.config, seed=seed, freeze_net=bool(freeze_net),
                               freeze_gaussians=bool(freeze_gaussians))
    return TrackerState(
        net=net,
        model=AppearanceModel(pos=pos, neg=neg),
        current_box=box,
        initial_aspect=initial_aspect,
        last_update_feature=feature.copy(),
        frame_index=int(frame_index),
        last_update_frame=int(last_update_frame),
        freeze_net=bool(freeze_net),
        freeze_gaussians=bool(freeze_gaussians),
        seed=seed,
        config=config,
    )


def load_state(path: Union[str, Path], config: Optional[TrackerConfig] = None) -> TrackerState:
    """
    Carrega um estado salvo com save_state.

    Args:
        path: Arquivo GDTW
        config: Configuração para continuar o rastreamento (padrão: valores padrão com a semente salva)

    Returns:
        TrackerState: Estado igual ao salvo

    Raises:
        WeightFormatError: Arquivo inválido, arquivo só de pesos ou seção corrompida
    """
    state = state_from_tensors(read_container(path), config)
    logger.info(f"Estado carregado de {path} (quadro {state.frame_index})")
    return state
