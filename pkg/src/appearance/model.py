"""Classificador naive Bayes sobre as características: score e gradientes."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from ..errors import DimensionMismatchError
from .gaussian import DiagonalGaussian, UpdateConfig, ema_update, fit_gaussian

logger = logging.getLogger(__name__)


class Label(str, Enum):
    POS = "pos"
    NEG = "neg"


@dataclass(frozen=True)
class AppearanceModel:
    """
    Par de Gaussianas (positivos, negativos) com priors iguais.

    Attributes:
        pos: Densidade das características do alvo
        neg: Densidade das características do fundo
    """

    pos: DiagonalGaussian
    neg: DiagonalGaussian

    def __post_init__(self):
        if self.pos.dim != self.neg.dim:
            raise DimensionMismatchError(f"G_pos ({self.pos.dim}) e G_neg ({self.neg.dim}) com dimensões diferentes")

    @property
    def dim(self) -> int:
        return self.pos.dim

    def swapped(self) -> "AppearanceModel":
        return AppearanceModel(pos=self.neg, neg=self.pos)

    @classmethod
    def fit(cls, pos_features: np.ndarray, neg_features: np.ndarray, variance_floor: float) -> "AppearanceModel":
        return cls(pos=fit_gaussian(pos_features, variance_floor), neg=fit_gaussian(neg_features, variance_floor))

    def updated(self, pos_stats: DiagonalGaussian, neg_stats: DiagonalGaussian, cfg: UpdateConfig) -> "AppearanceModel":
        return AppearanceModel(pos=ema_update(self.pos, pos_stats, cfg), neg=ema_update(self.neg, neg_stats, cfg))


def _check_dim(model: AppearanceModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != model.dim:
        raise DimensionMismatchError(f"x com shape {x.shape}, esperado (..., {model.dim})")
    return x


def score(model: AppearanceModel, x: np.ndarray) -> Union[float, np.ndarray]:
    """
    S(x) = log G_pos(x) - log G_neg(x), somado por dimensão em espaço log.

    Args:
        model: Modelo de aparência
        x: Vetor (N,) ou lote (K, N)

    Returns:
        float para um vetor, array (K,) para um lote

    Raises:
        DimensionMismatchError: Se a dimensão não corresponder ao modelo
    """
    x = _check_dim(model, x)
    terms = model.pos.log_pdf(x) - model.neg.log_pdf(x)
    total = terms.sum(axis=-1)
    return float(total) if x.ndim == 1 else total


def _ascent(model: AppearanceModel, x: np.ndarray) -> np.ndarray:
    return -(x - model.pos.mu) / model.pos.var + (x - model.neg.mu) / model.neg.var


def score_gradient(model: AppearanceModel, x: np.ndarray, label: Union[Label, str]) -> np.ndarray:
    """
    Gradiente de S em relação a x, negado para exemplos negativos.

        g_i = -(x_i - μ_pos_i)/σ²_pos_i + (x_i - μ_neg_i)/σ²_neg_i

    Args:
        model: Modelo de aparência (mantido fixo)
        x: Vetor (N,)
        label: 'pos' devolve g, 'neg' devolve -g

    Returns:
        np.ndarray: Vetor (N,)
    """
    x = _check_dim(model, x)
    gradient = _ascent(model, x)
    return gradient if Label(label) is Label.POS else -gradient


def label_signs(labels: Sequence[Union[Label, str]]) -> np.ndarray:
    """+1 para positivos, -1 para negativos."""
    return np.array([1.0 if Label(label) is Label.POS else -1.0 for label in labels])


def batch_gradients(model: AppearanceModel, features: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """
    Gradientes por amostra de um lote (K, N), já com o sinal do rótulo.

    Returns:
        np.ndarray: (K, N)
    """
    features = _check_dim(model, np.atleast_2d(features))
    return _ascent(model, features) * np.asarray(signs, dtype=np.float64)[:, None]


def batch_gradient(model: AppearanceModel, batch: Iterable[Tuple[np.ndarray, Union[Label, str]]]) -> np.ndarray:
    """
    Soma dos gradientes de score_gradient sobre o lote do quadro.

    Args:
        model: Modelo de aparência
        batch: Pares (x, rótulo)

    Returns:
        np.ndarray: Vetor (N,)

    Raises:
        ValueError: Se o lote estiver vazio
    """
    items = list(batch)
    if not items:
        raise ValueError("batch_gradient requer um lote não vazio")
    features = np.stack([np.asarray(x, dtype=np.float64) for x, _ in items])
    signs = label_signs([label for _, label in items])
    return batch_gradients(model, features, signs).sum(axis=0)
