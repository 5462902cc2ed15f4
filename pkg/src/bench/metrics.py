"""Protocolo de avaliação: curvas de precisão e de sucesso, relatório por atributo."""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..imaging.geometry import BoundingBox, boxes_to_array, center_distance_many, iou_many

logger = logging.getLogger(__name__)

PRECISION_THRESHOLD = 20
ALL_ROW = "ALL"
# IoU de boxes idênticas pode sair 1 - ulp na aritmética de ponto flutuante
OVERLAP_TOLERANCE = 1e-12
# limiares gerados com passo fracionário (ex: 200 x 0.1) não são exatos
THRESHOLD_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EvalCurve:
    """Amostras (limiar, valor) com limiares estritamente crescentes e valores em [0, 1]."""

    samples: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        thresholds = self.thresholds
        if len(thresholds) > 1 and not np.all(np.diff(thresholds) > 0):
            raise ValueError("Limiares da curva devem ser estritamente crescentes")
        values = self.values
        if len(values) and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("Valores da curva devem estar em [0, 1]")

    @classmethod
    def from_arrays(cls, thresholds: Iterable[float], values: Iterable[float]) -> "EvalCurve":
        return cls(samples=tuple((float(t), float(v)) for t, v in zip(thresholds, values)))

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples], dtype=np.float64)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples], dtype=np.float64)

    def value_at(self, threshold: float) -> float:
        """
        Valor no limiar da curva, com tolerância de ponto flutuante na busca.

        Raises:
            ValueError: Se o limiar não estiver na grade da curva
        """
        thresholds = self.thresholds
        matches = np.flatnonzero(np.isclose(thresholds, threshold, rtol=0.0, atol=THRESHOLD_TOLERANCE))
        if matches.size == 0:
            span = f"{thresholds[0]:g}..{thresholds[-1]:g}" if thresholds.size else "vazia"
            raise ValueError(f"Limiar {threshold:g} fora da grade da curva ({thresholds.size} limiares, {span})")
        return float(self.values[matches[0]])


def _check_lengths(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> Tuple[np.ndarray, np.ndarray]:
    if len(pred) != len(gt):
        raise ValueError(f"Predições ({len(pred)}) e ground truth ({len(gt)}) com tamanhos diferentes")
    if not gt:
        raise ValueError("Avaliação requer ao menos um quadro")
    return boxes_to_array(pred), boxes_to_array(gt)


def precision_curve(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox],
                    max_threshold: float = 50, step: float = 1) -> EvalCurve:
    """
    Fração de quadros com erro de centro <= t, para t = 0, step, ..., max_threshold pixels.

    Raises:
        ValueError: Se os tamanhos diferirem, step <= 0 ou max_threshold < 0
    """
    if not step > 0 or not max_threshold >= 0:
        raise ValueError(f"step deve ser > 0 e max_threshold >= 0 (recebido: {step}, {max_threshold})")
    rects_pred, rects_gt = _check_lengths(pred, gt)
    errors = center_distance_many(rects_pred, rects_gt)
    count = int(np.floor(max_threshold / step + THRESHOLD_TOLERANCE)) + 1
    thresholds = np.arange(count, dtype=np.float64) * step
    values = (errors[None, :] <= thresholds[:, None]).mean(axis=1)
    return EvalCurve.from_arrays(thresholds, values)


def precision_at(curve: EvalCurve, threshold: float = PRECISION_THRESHOLD) -> float:
    """
    Precisão representativa (padrão: 20 pixels).

    Raises:
        ValueError: Se o limiar não estiver na grade da curva (ex: max_threshold < 20)
    """
    return curve.value_at(float(threshold))


def success_thresholds() -> np.ndarray:
    """Os 101 limiares de IoU 0, 0.01, ..., 1."""
    return np.arange(101, dtype=np.float64) / 100.0


def success_curve(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> EvalCurve:
    """
    Fração de quadros com IoU >= t para t em {0, 0.01, ..., 1}.

    Raises:
        ValueError: Se os tamanhos diferirem
    """
    rects_pred, rects_gt = _check_lengths(pred, gt)
    overlaps = iou_many(rects_pred, rects_gt)
    thresholds = success_thresholds()
    values = (overlaps[None, :] + OVERLAP_TOLERANCE >= thresholds[:, None]).mean(axis=1)
    return EvalCurve.from_arrays(thresholds, values)


def success_auc(curve: EvalCurve) -> float:
    """Área sob a curva de sucesso = média das amostras."""
    return float(np.mean(curve.values))


def mean_curve(curves: Sequence[EvalCurve]) -> EvalCurve:
    """Média ponto a ponto de curvas com os mesmos limiares."""
    if not curves:
        raise ValueError("mean_curve requer ao menos uma curva")
    thresholds = curves[0].thresholds
    for curve in curves[1:]:
        if not np.array_equal(curve.thresholds, thresholds):
            raise ValueError("Curvas com limiares diferentes não podem ser combinadas")
    return EvalCurve.from_arrays(thresholds, np.mean([curve.values for curve in curves], axis=0))


@dataclass(frozen=True)
class SequenceScores:
    """Resultado de uma sequência para o relatório por atributo."""

    name: str
    attributes: frozenset
    precision: EvalCurve
    success: EvalCurve

    @property
    def precision20(self) -> float:
        return precision_at(self.precision)

    @property
    def auc(self) -> float:
        return success_auc(self.success)


def attribute_report(results: Sequence[SequenceScores]) -> List[Dict[str, object]]:
    """
    Agrega precisão@20 e AUC de sucesso por atributo.

    A linha "ALL" cobre todas as sequências; cada atributo cobre as sequências
    que o carregam. Sequências sem tags aparecem apenas em "ALL".

    Returns:
        Lista de dicts {attribute, sequences, precision20, success_auc}, "ALL" primeiro
    """
    groups: Dict[str, List[SequenceScores]] = {ALL_ROW: list(results)}
    for result in results:
        for tag in sorted(result.attributes):
            groups.setdefault(tag, []).append(result)

    rows = []
    for name in [ALL_ROW] + sorted(key for key in groups if key != ALL_ROW):
        members = groups[name]
        if not members:
            continue
        rows.append({
            "attribute": name,
            "sequences": len(members),
            "precision20": float(np.mean([member.precision20 for member in members])),
            "success_auc": float(np.mean([member.auc for member in members])),
        })
    return rows
