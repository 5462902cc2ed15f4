"""Pré-treino de objectness: todas as camadas, cabeça logística temporária."""

import logging
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..errors import NumericError
from ..imaging.geometry import BoundingBox, crop_resize_batch
from ..imaging.image_io import load_image, to_grayscale
from ..imaging.textures import block_texture, quantize, smooth_field
from ..network.backbone import Network, NetworkConfig, apply_sgd, backward_full, extract_features, init_network
from .config import TrackerConfig

logger = logging.getLogger(__name__)

OBJECT_DIR = "object"
BACKGROUND_DIR = "background"
PATCH_SUFFIXES = (".pgm", ".ppm")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class ObjectnessTrainer:
    """
    Treina o backbone a separar patches de objeto e de fundo.

    Uma cabeça logística p = σ(w·x + b) é acoplada às características fc7 e
    descartada ao final; o gradiente da entropia cruzada passa por todas as
    camadas, convolucionais incluídas.
    """

    def __init__(self, net: Network, learning_rate: float = 0.01, batch_size: int = 32, seed: int = 0):
        """
        Inicializa o treinador.

        Args:
            net: Rede a treinar (atualizada in place)
            learning_rate: Taxa do SGD
            batch_size: Tamanho do mini-lote
            seed: Semente da cabeça e da ordem dos lotes
        """
        if not learning_rate > 0:
            raise ValueError(f"learning_rate deve ser maior que 0 (recebido: {learning_rate})")
        if batch_size < 1:
            raise ValueError(f"batch_size deve ser maior que 0 (recebido: {batch_size})")
        self.net = net
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.rng = np.random.default_rng([seed, 1])
        dim = net.config.feature_dim
        self.head_weight = self.rng.uniform(-1.0, 1.0, size=dim) / np.sqrt(dim)
        self.head_bias = 0.0

    def predict_proba(self, patches: np.ndarray) -> np.ndarray:
        """Probabilidade de objeto para cada patch (K, S, S[, C])."""
        features, _ = extract_features(self.net, patches)
        return _sigmoid(features @ self.head_weight + self.head_bias)

    def accuracy(self, patches: np.ndarray, labels: np.ndarray) -> float:
        """Fração de patches classificados corretamente com limiar 0.5."""
        predicted = self.predict_proba(patches) >= 0.5
        return float(np.mean(predicted == (np.asarray(labels) > 0.5)))

    def step(self, patches: np.ndarray, labels: np.ndarray) -> float:
        """
        Um passo de SGD sobre um mini-lote.

        Returns:
            float: Entropia cruzada média antes do passo

        Raises:
            NumericError: Se a perda não for finita
        """
        labels = np.asarray(labels, dtype=np.float64)
        features, cache = extract_features(self.net, patches, keep_conv=True)
        logits = features @ self.head_weight + self.head_bias
        probs = _sigmoid(logits)
        # log(1 + e^z) - y·z, estável para |z| grande
        loss = float(np.mean(np.logaddexp(0.0, logits) - labels * logits))
        if not np.isfinite(loss):
            raise NumericError(f"Perda de objectness não finita: {loss}")

        dlogits = (probs - labels) / labels.shape[0]
        grads = backward_full(self.net, cache, np.outer(dlogits, self.head_weight))
        apply_sgd(self.net, grads, self.learning_rate, include_conv=True)
        self.head_weight = self.head_weight - self.learning_rate * (features.T @ dlogits)
        self.head_bias = self.head_bias - self.learning_rate * float(dlogits.sum())
        return loss

    def train(self, patches: np.ndarray, labels: np.ndarray, iterations: int) -> List[float]:
        """
        Executa iterations passos com mini-lotes sorteados sem reposição.

        Returns:
            Lista de perdas por iteração
        """
        count = len(labels)
        if count == 0:
            raise ValueError("Corpus de objectness vazio")
        size = min(self.batch_size, count)
        losses = []
        for iteration in range(iterations):
            batch = self.rng.choice(count, size=size, replace=False)
            losses.append(self.step(patches[batch], np.asarray(labels)[batch]))
            if (iteration + 1) % 20 == 0:
                logger.debug(f"Objectness: iteração {iteration + 1}/{iterations}, perda {losses[-1]:.4f}")
        return losses


def synthetic_objectness_corpus(count: int, size: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gera em memória count patches de objeto e count de fundo.

    Objetos são texturas de blocos de alto contraste centradas sobre um fundo suave;
    fundos são campos suaves com ruído.

    Returns:
        Tupla (patches uint8 (2·count, size, size), rótulos 1/0)
    """
    if count < 1 or size < 4:
        raise ValueError(f"count deve ser >= 1 e size >= 4 (recebido: {count}, {size})")
    rng = np.random.default_rng([seed, 2])
    patches = []
    for _ in range(count):
        canvas = smooth_field(rng, size, size, cells=3)
        side = int(rng.integers(size // 2, size - size // 8 + 1))
        offset_x, offset_y = rng.integers(0, size - side + 1, size=2)
        block = max(2, side // 8)
        canvas[offset_y:offset_y + side, offset_x:offset_x + side] = block_texture(rng, side, side, block=block)
        patches.append(quantize(canvas, rng, noise_sigma=4.0))
    for _ in range(count):
        patches.append(quantize(smooth_field(rng, size, size, cells=3), rng, noise_sigma=4.0))
    labels = np.concatenate([np.ones(count), np.zeros(count)])
    return np.stack(patches), labels


def _read_patches(folder: Path, size: int, channels: int) -> List[np.ndarray]:
    if not folder.is_dir():
        return []
    patches = []
    for path in sorted(p for p in folder.iterdir() if p.suffix.lower() in PATCH_SUFFIXES):
        image = load_image(path)
        if channels == 1:
            image = to_grayscale(image)
        full = BoundingBox(0.0, 0.0, float(image.width), float(image.height))
        patch = crop_resize_batch(image, [full], size, size)[0]
        if patch.shape[-1] != channels:
            patch = np.repeat(patch, channels, axis=-1)
        patches.append(patch)
    return patches


def load_objectness_corpus(corpus_dir: Union[str, Path], size: int, channels: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lê os patches de corpus_dir/object e corpus_dir/background, reamostrados para size x size.

    Returns:
        Tupla (patches uint8 (K, size, size, C), rótulos 1/0)

    Raises:
        ValueError: Se o corpus estiver vazio
        ImageFormatError: Se algum patch for ilegível
    """
    root = Path(corpus_dir)
    objects = _read_patches(root / OBJECT_DIR, size, channels)
    backgrounds = _read_patches(root / BACKGROUND_DIR, size, channels)
    if not objects or not backgrounds:
        raise ValueError(
            f"Corpus de objectness vazio em {root}: {len(objects)} objetos, {len(backgrounds)} fundos "
            f"(esperado {OBJECT_DIR}/ e {BACKGROUND_DIR}/ com PGM/PPM)"
        )
    labels = np.concatenate([np.ones(len(objects)), np.zeros(len(backgrounds))])
    return np.stack(objects + backgrounds), labels


def pretrain_objectness(
    corpus_dir: Optional[Union[str, Path]],
    iterations: int,
    cfg: TrackerConfig,
    net: Optional[Network] = None,
) -> Network:
    """
    Pré-treina todas as camadas em objeto vs fundo e devolve o backbone.

    Args:
        corpus_dir: Pasta com object/ e background/ (None usa o corpus sintético em memória)
        iterations: Passos de SGD (0 devolve a rede inicial intacta)
        cfg: Configuração (arquitetura, semente, taxa e lote do pré-treino)
        net: Rede inicial (padrão: init_network(cfg.network, cfg.seed))

    Returns:
        Network: Backbone treinado (a cabeça é descartada)
    """
    if iterations < 0:
        raise ValueError(f"iterations não pode ser negativo (recebido: {iterations})")
    net = net.copy() if net is not None else init_network(cfg.network, seed=cfg.seed)
    if iterations == 0:
        return net

    size, channels = net.config.input_size, net.config.input_channels
    if corpus_dir is None:
        patches, labels = synthetic_objectness_corpus(cfg.pretrain_corpus_size, size, cfg.seed)
        if channels != 1:
            patches = np.repeat(patches[..., None], channels, axis=-1)
    else:
        patches, labels = load_objectness_corpus(corpus_dir, size, channels)

    logger.info(f"Pré-treino de objectness: {len(labels)} patches, {iterations} iterações, seed={cfg.seed}")
    trainer = ObjectnessTrainer(net, cfg.pretrain_learning_rate, cfg.pretrain_batch_size, seed=cfg.seed)
    losses = trainer.train(patches, labels, iterations)
    logger.info(f"Pré-treino concluído: perda final {losses[-1]:.4f}, acurácia de treino {trainer.accuracy(patches, labels):.3f}")
    return net


@lru_cache(maxsize=8)
def _cached_pretrained(network: NetworkConfig, seed: int, iterations: int, learning_rate: float,
                       batch_size: int, corpus_size: int) -> Network:
    cfg = TrackerConfig(
        network=network,
        seed=seed,
        pretrain_iterations=iterations,
        pretrain_learning_rate=learning_rate,
        pretrain_batch_size=batch_size,
        pretrain_corpus_size=corpus_size,
    )
    return pretrain_objectness(None, iterations, cfg)


def pretrained_network(cfg: TrackerConfig) -> Network:
    """
    Backbone pré-treinado no corpus sintético em memória, reaproveitado entre chamadas
    com a mesma configuração.
    """
    net = _cached_pretrained(
        cfg.network, cfg.seed, cfg.pretrain_iterations, cfg.pretrain_learning_rate,
        cfg.pretrain_batch_size, cfg.pretrain_corpus_size,
    )
    return net.copy()
