"""Laço de rastreamento: ajuste no primeiro quadro, predição, portão de confiança e atualização online.

Cada quadro passa por dois estágios. No primeiro, o candidato de maior score é
escolhido e as Gaussianas são reestimadas ao redor dele. No segundo, com as
Gaussianas fixas, o gradiente do score em relação às características é
propagado até fc6/fc7. Ambos só acontecem quando o portão de confiança aceita
o quadro.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..appearance.gaussian import fit_gaussian
from ..appearance.model import AppearanceModel, batch_gradients, score
from ..errors import DimensionMismatchError, GeometryError, NumericError, SamplingError
from ..imaging.geometry import BoundingBox, boxes_to_array, center_distance_many, crop_resize_batch
from ..imaging.image_io import ImageBuffer, to_grayscale
from ..network.backbone import (
    Network,
    apply_sgd,
    backward_fc,
    clip_gradients,
    conv_features,
    extract_features,
    fc_forward,
    init_network,
    networks_equal,
)
from ..network.weights import load_weights
from ..sampling.sampler import (
    fit_inside,
    generate_candidates,
    sample_negatives,
    sample_positives,
    search_radius_for,
)
from .config import TrackerConfig
from .pretrain import pretrained_network

logger = logging.getLogger(__name__)

NetworkSource = Union[Network, str, Path, None]


@dataclass
class FrameReport:
    """
    Diagnóstico de um quadro (não é serializado).

    Attributes:
        frame_index: Índice do quadro rastreado
        candidates: Boxes avaliadas
        scores: Score de cada candidato
        best_index: Índice do candidato escolhido
        updated: Se o portão aceitou a atualização
        reason: Motivo da decisão do portão
    """

    frame_index: int
    candidates: List[BoundingBox]
    scores: np.ndarray
    best_index: int
    updated: bool
    reason: str


@dataclass(eq=False)
class TrackerState:
    """
    Estado do rastreador entre quadros.

    Attributes:
        net: Rede própria do rastreador (cópia da recebida)
        model: Gaussianas positiva e negativa
        current_box: Última localização x*
        initial_aspect: Proporção w/h da box inicial
        last_update_feature: Média das características positivas da última atualização aceita
        frame_index: Índice do último quadro processado (0 = inicialização)
        last_update_frame: Quadro da última atualização aceita
        freeze_net: Congela fc6/fc7 durante o rastreamento
        freeze_gaussians: Congela as Gaussianas durante o rastreamento
        seed: Semente dos sorteios por quadro
        config: Configuração em uso (não serializada)
        last_report: FrameReport do último quadro quando config.debug
    """

    net: Network
    model: AppearanceModel
    current_box: BoundingBox
    initial_aspect: float
    last_update_feature: np.ndarray
    frame_index: int = 0
    last_update_frame: int = 0
    freeze_net: bool = False
    freeze_gaussians: bool = False
    seed: int = 0
    config: TrackerConfig = field(default_factory=TrackerConfig)
    last_report: Optional[FrameReport] = None

    def __post_init__(self):
        if self.model.dim != self.net.config.feature_dim:
            raise DimensionMismatchError(
                f"Modelo com dimensão {self.model.dim}, rede com feature_dim {self.net.config.feature_dim}"
            )

    def __eq__(self, other: object) -> bool:
        """Igualdade das partes serializadas; config e last_report são ignorados."""
        if not isinstance(other, TrackerState):
            return NotImplemented
        return (
            networks_equal(self.net, other.net)
            and self.model.pos == other.model.pos
            and self.model.neg == other.model.neg
            and self.current_box == other.current_box
            and self.initial_aspect == other.initial_aspect
            and np.asarray(self.last_update_feature).tobytes() == np.asarray(other.last_update_feature).tobytes()
            and (self.frame_index, self.last_update_frame) == (other.frame_index, other.last_update_frame)
            and (self.freeze_net, self.freeze_gaussians, self.seed) == (other.freeze_net, other.freeze_gaussians, other.seed)
        )


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Gerador do quadro, derivado apenas de (seed, índice); não há estado de RNG a salvar."""
    return np.random.default_rng([seed, frame_index])


def prepare_frame(frame: ImageBuffer, net: Network) -> ImageBuffer:
    """
    Ajusta os canais do quadro aos da rede.

    Raises:
        DimensionMismatchError: Se a rede espera cor e o quadro é cinza
    """
    channels = net.config.input_channels
    if frame.channels == channels:
        return frame
    if channels == 1:
        return to_grayscale(frame)
    raise DimensionMismatchError(f"Rede espera {channels} canais, quadro tem {frame.channels}")


def resolve_network(source: NetworkSource, cfg: TrackerConfig) -> Network:
    """
    Obtém a rede de partida.

    Ordem: rede ou caminho explícito, cfg.weights, pré-treino de objectness em
    memória (cfg.pretrain) ou inicialização aleatória.
    """
    if isinstance(source, Network):
        return source.copy()
    if source is not None:
        return load_weights(source)
    if cfg.weights:
        return load_weights(cfg.weights)
    if cfg.pretrain and cfg.pretrain_iterations > 0:
        return pretrained_network(cfg)
    return init_network(cfg.network, seed=cfg.seed)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0 or not math.isfinite(norm):
        return 0.0
    return float(np.dot(a, b) / norm)


def _gate(state: TrackerState, best_score: float, mean_feature: np.ndarray) -> Tuple[bool, str]:
    cfg = state.config
    if not best_score >= cfg.score_gate:
        return False, f"score {best_score:.3f} abaixo de {cfg.score_gate}"
    similarity = _cosine(mean_feature, state.last_update_feature)
    if not similarity >= cfg.similarity_threshold:
        return False, f"similaridade {similarity:.3f} abaixo de {cfg.similarity_threshold}"
    return True, f"score {best_score:.3f}, similaridade {similarity:.3f}"


def should_update(state: TrackerState, best_score: float, features_at_xstar: np.ndarray) -> bool:
    """
    Portão de confiança para a atualização online.

    Args:
        state: Estado atual
        best_score: Score S(x*) do candidato escolhido
        features_at_xstar: Características positivas amostradas em x* (lote (K, N) ou média (N,))

    Returns:
        bool: score >= score_gate e cosseno(média, last_update_feature) >= similarity_threshold
    """
    features = np.asarray(features_at_xstar, dtype=np.float64)
    mean_feature = features.mean(axis=0) if features.ndim == 2 else features
    return _gate(state, best_score, mean_feature)[0]


def _patches(frame: ImageBuffer, boxes: List[BoundingBox], net: Network) -> np.ndarray:
    size = net.config.input_size
    return crop_resize_batch(frame, boxes, size, size)


def _fc_step(net: Network, model: AppearanceModel, h0: np.ndarray, signs: np.ndarray, cfg: TrackerConfig) -> float:
    """
    Um passo de SGD em fc6/fc7 minimizando -Σ_pos S + Σ_neg S com as Gaussianas fixas.

    Returns:
        float: Valor da perda antes do passo

    Raises:
        NumericError: Se a perda não for finita
    """
    cache = fc_forward(net, h0)
    loss = -float(np.sum(signs * score(model, cache.features)))
    if not math.isfinite(loss):
        raise NumericError(f"Perda não finita no ajuste de fc ({loss})")
    grad_x = -batch_gradients(model, cache.features, signs)
    grads, _ = clip_gradients(backward_fc(net, cache, grad_x), cfg.grad_clip_norm)
    apply_sgd(net, grads, cfg.fc_learning_rate)
    return loss


def _score_gap(model: AppearanceModel, features: np.ndarray, n_pos: int) -> float:
    scores = score(model, features)
    return float(np.mean(scores[:n_pos]) - np.mean(scores[n_pos:]))


def initialize(
    first_frame: ImageBuffer,
    box: BoundingBox,
    cfg: Optional[TrackerConfig] = None,
    net_or_weights: NetworkSource = None,
) -> TrackerState:
    """
    Ajusta o rastreador ao alvo do primeiro quadro.

    Amostra lotes positivo e negativo ao redor da box, executa até init_iterations
    passos de ajuste apenas em fc6/fc7 (reestimando as Gaussianas a cada passo) e
    estima as Gaussianas finais sobre as características pós-ajuste.

    Args:
        first_frame: Primeiro quadro
        box: Box do alvo (0-based)
        cfg: Configuração (padrão: TrackerConfig())
        net_or_weights: Rede, caminho de pesos GDTW ou None (ver resolve_network)

    Returns:
        TrackerState: Estado pronto para track_frame

    Raises:
        GeometryError: Se a box estiver fora do quadro
        SamplingError: Se a amostragem falhar
        NumericError: Se a perda do ajuste deixar de ser finita
    """
    cfg = cfg or TrackerConfig()
    net = resolve_network(net_or_weights, cfg)
    frame = prepare_frame(first_frame, net)

    if box.x + box.w <= 0 or box.y + box.h <= 0 or box.x >= frame.width or box.y >= frame.height:
        raise GeometryError(f"Box inicial {box} fora do quadro {frame.width}x{frame.height}")
    box = fit_inside(box, frame.dims)

    rng = frame_rng(cfg.seed, 0)
    positives = sample_positives(box, frame.dims, cfg.sampler, rng)
    negatives = sample_negatives(box, frame.dims, cfg.sampler, rng)
    n_pos = len(positives)
    signs = np.concatenate([np.ones(n_pos), -np.ones(len(negatives))])
    h0 = conv_features(net, _patches(frame, positives + negatives, net))
    floor = cfg.update.variance_floor

    logger.info(f"Inicializando rastreador em {box}: {n_pos} positivos, {len(negatives)} negativos, "
                f"até {cfg.init_iterations} iterações")
    gaps: List[float] = []
    iterations = 0
    for iteration in range(cfg.init_iterations):
        features = fc_forward(net, h0).features
        model = AppearanceModel.fit(features[:n_pos], features[n_pos:], floor)
        gaps.append(_score_gap(model, features, n_pos))
        window = cfg.early_stop_window
        if window and len(gaps) > window:
            reference = gaps[-window - 1]
            if abs(gaps[-1] - reference) < cfg.early_stop_tolerance * max(abs(reference), 1e-12):
                logger.warning(f"Ajuste inicial estabilizou na iteração {iteration} (gap pos-neg {gaps[-1]:.4f})")
                break
        _fc_step(net, model, h0, signs, cfg)
        iterations += 1

    features = fc_forward(net, h0).features
    model = AppearanceModel.fit(features[:n_pos], features[n_pos:], floor)
    gap = _score_gap(model, features, n_pos)
    if not math.isfinite(gap):
        raise NumericError(f"Scores não finitos após o ajuste inicial (gap {gap})")
    logger.info(f"Inicialização concluída após {iterations} iterações: gap pos-neg {gap:.4f}")

    return TrackerState(
        net=net,
        model=model,
        current_box=box,
        initial_aspect=box.aspect,
        last_update_feature=features[:n_pos].mean(axis=0),
        frame_index=0,
        last_update_frame=0,
        freeze_net=cfg.freeze_net,
        freeze_gaussians=cfg.freeze_gaussians,
        seed=cfg.seed,
        config=cfg,
    )


def select_best(scores: np.ndarray, boxes: List[BoundingBox], prev_box: BoundingBox) -> int:
    """
    Índice do maior score; empates vão para o centro mais próximo da box anterior e depois ao menor índice.
    """
    values = np.where(np.isnan(scores), -np.inf, scores)
    distances = center_distance_many(boxes_to_array(boxes), prev_box.to_array())
    order = np.lexsort((np.arange(len(values)), distances, -values))
    return int(order[0])


def track_frame(state: TrackerState, frame: ImageBuffer) -> Tuple[BoundingBox, float]:
    """
    Rastreia o alvo em um novo quadro e atualiza o estado.

    Args:
        state: Estado inicializado (modificado in place)
        frame: Próximo quadro

    Returns:
        Tupla (x*, S(x*)); se a geração de candidatos falhar, (box anterior, -inf)
    """
    cfg = state.config
    net = state.net
    frame = prepare_frame(frame, net)
    index = state.frame_index + 1
    rng = frame_rng(state.seed, index)
    prev_box = state.current_box

    expanded = state.last_update_frame < state.frame_index
    radius = search_radius_for(prev_box, cfg.sampler, expanded=expanded)
    try:
        candidates = generate_candidates(prev_box, frame.dims, cfg.sampler, rng, radius=radius)
        features, _ = extract_features(net, _patches(frame, candidates.boxes, net))
    except (SamplingError, GeometryError) as e:
        logger.warning(f"Quadro {index}: geração de candidatos falhou ({e}); mantendo {prev_box}")
        state.frame_index = index
        return prev_box, float("-inf")

    scores = score(state.model, features)
    best = select_best(scores, candidates.boxes, prev_box)
    best_box, best_score = candidates.boxes[best], float(scores[best])
    logger.debug(f"Quadro {index}: {len(candidates)} candidatos (raio {radius:.1f}px), melhor score {best_score:.3f}")

    updated, reason = _update(state, frame, best_box, best_score, rng)
    if not updated:
        logger.warning(f"Quadro {index}: atualização rejeitada ({reason})")

    state.current_box = best_box
    state.frame_index = index
    if cfg.debug:
        state.last_report = FrameReport(
            frame_index=index,
            candidates=list(candidates.boxes),
            scores=np.asarray(scores),
            best_index=best,
            updated=updated,
            reason=reason,
        )
    return best_box, best_score


def _update(
    state: TrackerState, frame: ImageBuffer, best_box: BoundingBox, best_score: float, rng: np.random.Generator
) -> Tuple[bool, str]:
    """Portão de confiança e atualização em dois estágios ao redor de x*."""
    cfg = state.config
    net = state.net
    if not best_score >= cfg.score_gate:
        return False, f"score {best_score:.3f} abaixo de {cfg.score_gate}"

    try:
        positives = sample_positives(best_box, frame.dims, cfg.sampler, rng)
    except SamplingError as e:
        return False, f"amostragem de positivos falhou: {e}"
    h0_pos = conv_features(net, _patches(frame, positives, net))
    pos_features = fc_forward(net, h0_pos).features
    mean_feature = pos_features.mean(axis=0)

    accepted, reason = _gate(state, best_score, mean_feature)
    if not accepted:
        return False, reason

    try:
        negatives = sample_negatives(best_box, frame.dims, cfg.sampler, rng)
    except SamplingError as e:
        return False, f"amostragem de negativos falhou: {e}"
    h0_neg = conv_features(net, _patches(frame, negatives, net))

    if not state.freeze_gaussians:
        floor = cfg.update.variance_floor
        neg_features = fc_forward(net, h0_neg).features
        state.model = state.model.updated(
            fit_gaussian(pos_features, floor), fit_gaussian(neg_features, floor), cfg.update
        )
    if not state.freeze_net:
        h0 = np.concatenate([h0_pos, h0_neg], axis=0)
        signs = np.concatenate([np.ones(len(positives)), -np.ones(len(negatives))])
        for _ in range(cfg.online_iterations):
            _fc_step(net, state.model, h0, signs, cfg)

    state.last_update_feature = mean_feature
    state.last_update_frame = state.frame_index + 1
    return True, reason
