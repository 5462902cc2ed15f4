"""Serviço de avaliação de resultados contra o ground truth."""

import logging
from typing import Any, Dict, Optional

from ..bench.metrics import precision_at, precision_curve, success_auc, success_curve
from ..bench.report import emit_report
from ..bench.sequence import read_boxes, read_results

logger = logging.getLogger(__name__)


class EvaluationService:
    """Serviço para calcular as curvas de precisão e sucesso de um results.txt."""

    def __init__(self):
        logger.info("EvaluationService inicializado")

    def evaluate(self, results: str, gt: str, csv: str, svg: Optional[str] = None) -> Dict[str, Any]:
        """
        Avalia um arquivo de resultados e grava o relatório.

        Args:
            results: results.txt (x,y,w,h 1-based por linha)
            gt: groundtruth_rect.txt correspondente
            csv: Destino do relatório CSV
            svg: Destino do gráfico SVG (opcional)

        Returns:
            Dict com resultado da operação:
                - success: bool
                - message: str
                - frames: int
                - precision20: float
                - success_auc: float

        Raises:
            ValueError: Se algum caminho obrigatório estiver vazio
        """
        for name, value in (("results", results), ("gt", gt), ("csv", csv)):
            if not value or not str(value).strip():
                error_msg = f"{name} não pode estar vazio"
                logger.error(error_msg)
                raise ValueError(error_msg)

        try:
            logger.info(f"Iniciando avaliação: results='{results}', gt='{gt}'")
            predictions = read_results(results)
            ground_truth = read_boxes(gt)

            precision = precision_curve(predictions, ground_truth)
            success = success_curve(predictions, ground_truth)
            emit_report(precision, success, csv, svg)

            precision20 = precision_at(precision)
            auc = success_auc(success)
            logger.info(f"Avaliação concluída: {len(predictions)} quadros, precisão@20 {precision20:.3f}, AUC {auc:.3f}")

            return {
                "success": True,
                "message": "Avaliação concluída com sucesso",
                "frames": len(predictions),
                "precision20": precision20,
                "success_auc": auc,
                "csv": csv,
                "svg": svg,
            }

        except Exception as e:
            error_msg = f"Erro ao avaliar resultados: {str(e)}"
            logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "message": error_msg,
                "error": str(e),
            }
