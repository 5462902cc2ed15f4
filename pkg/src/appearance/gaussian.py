"""Gaussianas diagonais: estimação por máxima verossimilhança e atualização EMA."""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ..errors import DimensionMismatchError

logger = logging.getLogger(__name__)

DEFAULT_VARIANCE_FLOOR = 1e-4
CROSS_TERMS = ("sigma_diff", "mu_diff")


@dataclass(frozen=True)
class UpdateConfig:
    """
    Parâmetros da atualização online das Gaussianas.

    Attributes:
        gamma: Peso do modelo antigo, em [0, 1]
        variance_floor: Menor variância admitida por dimensão
        variance_cross_term: 'sigma_diff' usa (σ - σ*)², 'mu_diff' usa (μ - μ*)²
    """

    gamma: float = 0.95
    variance_floor: float = DEFAULT_VARIANCE_FLOOR
    variance_cross_term: str = "sigma_diff"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma deve estar entre 0.0 e 1.0 (recebido: {self.gamma})")
        if not self.variance_floor > 0:
            raise ValueError(f"variance_floor deve ser maior que 0 (recebido: {self.variance_floor})")
        if self.variance_cross_term not in CROSS_TERMS:
            raise ValueError(f"variance_cross_term inválido: {self.variance_cross_term} (use {', '.join(CROSS_TERMS)})")


@dataclass(frozen=True, eq=False)
class DiagonalGaussian:
    """
    Gaussiana com dimensões independentes.

    Attributes:
        mu: Médias por dimensão
        var: Variâncias por dimensão (>= piso)
    """

    mu: np.ndarray
    var: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64)
        var = np.array(self.var, dtype=np.float64)
        if mu.ndim != 1 or mu.shape != var.shape:
            raise DimensionMismatchError(f"mu {mu.shape} e var {var.shape} devem ser vetores de mesmo tamanho")
        if not np.all(var > 0):
            raise ValueError("Variâncias devem ser positivas")
        mu.setflags(write=False)
        var.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "var", var)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        """
        Log-densidade por dimensão, em espaço log.

        Args:
            x: Vetor (N,) ou lote (K, N)

        Returns:
            np.ndarray: Termos log N(x_i; μ_i, σ_i²) com o mesmo shape de x
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(f"x com dimensão {x.shape[-1]}, esperado {self.dim}")
        return -0.5 * np.log(2.0 * np.pi * self.var) - (x - self.mu) ** 2 / (2.0 * self.var)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiagonalGaussian):
            return NotImplemented
        return self.mu.tobytes() == other.mu.tobytes() and self.var.tobytes() == other.var.tobytes()


def fit_gaussian(
    features: Union[np.ndarray, Sequence[np.ndarray]], variance_floor: float = DEFAULT_VARIANCE_FLOOR
) -> DiagonalGaussian:
    """
    Estima média e variância populacional (1/M) por dimensão.

    Args:
        features: Lote (M, N) de vetores de características, M >= 2
        variance_floor: Piso aplicado às variâncias

    Returns:
        DiagonalGaussian: Estimativa de máxima verossimilhança

    Raises:
        ValueError: Se o lote tiver menos de 2 amostras
    """
    batch = np.asarray(features, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[0] < 2:
        raise ValueError(f"fit_gaussian requer um lote (M, N) com M >= 2 (recebido: shape {batch.shape})")
    mu = batch.mean(axis=0)
    var = np.maximum(((batch - mu) ** 2).mean(axis=0), variance_floor)
    return DiagonalGaussian(mu=mu, var=var)


def ema_update(gaussian: DiagonalGaussian, new_stats: DiagonalGaussian, cfg: UpdateConfig) -> DiagonalGaussian:
    """
    Combina o modelo atual com estatísticas recém-estimadas.

        μ  <- γμ + (1-γ)μ*
        σ² <- γσ² + (1-γ)σ*² + γ(1-γ)d²,  d = σ - σ* ou μ - μ*

    Args:
        gaussian: Modelo atual
        new_stats: Estatísticas do quadro atual
        cfg: Taxa γ, piso de variância e variante do termo cruzado

    Returns:
        DiagonalGaussian: Novo modelo, com piso reaplicado

    Raises:
        DimensionMismatchError: Se as dimensões diferirem
    """
    if gaussian.dim != new_stats.dim:
        raise DimensionMismatchError(f"Dimensões diferentes: {gaussian.dim} e {new_stats.dim}")
    gamma = cfg.gamma
    mu = gamma * gaussian.mu + (1.0 - gamma) * new_stats.mu
    if cfg.variance_cross_term == "sigma_diff":
        diff = np.sqrt(gaussian.var) - np.sqrt(new_stats.var)
    else:
        diff = gaussian.mu - new_stats.mu
    var = gamma * gaussian.var + (1.0 - gamma) * new_stats.var + gamma * (1.0 - gamma) * diff ** 2
    return DiagonalGaussian(mu=mu, var=np.maximum(var, cfg.variance_floor))
