"""Serviço de geração de dados sintéticos (sequências e corpus de objectness)."""

import logging
from typing import Any, Dict, Optional, Tuple

from ..bench.synth import SynthParams, synth_corpus, synth_sequence

logger = logging.getLogger(__name__)


class SynthesisService:
    """Serviço para gravar sequências e corpora sintéticos em disco."""

    def __init__(self):
        logger.info("SynthesisService inicializado")

    def synth(
        self,
        out: str,
        frames: int = 100,
        seed: int = 0,
        velocity: Tuple[float, float] = (2.0, 1.0),
        occlude: Optional[Tuple[int, int]] = None,
        noise: float = 8.0,
        scale_drift: float = 0.0,
        width: int = 320,
        height: int = 240,
        target: Tuple[int, int] = (40, 40),
    ) -> Dict[str, Any]:
        """
        Gera uma sequência sintética no layout OTB.

        Args:
            out: Pasta de destino
            frames: Número de quadros
            seed: Semente
            velocity: Deslocamento (vx, vy) por quadro
            occlude: Intervalo [A, B) de quadros 1-based com o alvo coberto (opcional)
            noise: Desvio do ruído gaussiano
            scale_drift: Variação relativa do tamanho por quadro
            width: Largura dos quadros
            height: Altura dos quadros
            target: (largura, altura) inicial do alvo

        Returns:
            Dict com resultado da operação:
                - success: bool
                - message: str
                - frames: int
                - attributes: List[str]

        Raises:
            ValueError: Se out estiver vazio ou frames/seed forem inválidos
        """
        if not out or not str(out).strip():
            error_msg = "out não pode estar vazio"
            logger.error(error_msg)
            raise ValueError(error_msg)

        if frames < 1:
            error_msg = f"frames deve ser maior que 0 (recebido: {frames})"
            logger.error(error_msg)
            raise ValueError(error_msg)

        if seed < 0:
            error_msg = f"seed não pode ser negativa (recebido: {seed})"
            logger.error(error_msg)
            raise ValueError(error_msg)

        try:
            params = SynthParams(
                frames=frames,
                width=width,
                height=height,
                target_size=tuple(target),
                velocity=tuple(velocity),
                noise_sigma=noise,
                occlusion=tuple(occlude) if occlude else None,
                scale_drift=scale_drift,
            )
            logger.info(f"Iniciando geração sintética em '{out}': {frames} quadros, seed={seed}")
            sequence = synth_sequence(params, seed, out)

            return {
                "success": True,
                "message": f"Sequência sintética gravada em '{out}'",
                "sequence": sequence.name,
                "frames": len(sequence),
                "attributes": sorted(sequence.attributes),
                "occluded_frames": sum(sequence.occlusion or []),
            }

        except Exception as e:
            error_msg = f"Erro ao gerar sequência sintética: {str(e)}"
            logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "message": error_msg,
                "error": str(e),
            }

    def synth_corpus(self, out: str, count: int = 64, size: int = 64, seed: int = 0) -> Dict[str, Any]:
        """
        Gera um corpus de objectness (object/ e background/).

        Returns:
            Dict com success, message, objects e backgrounds

        Raises:
            ValueError: Se out estiver vazio ou count/size forem inválidos
        """
        if not out or not str(out).strip():
            error_msg = "out não pode estar vazio"
            logger.error(error_msg)
            raise ValueError(error_msg)

        if count < 1 or size < 4:
            error_msg = f"count deve ser >= 1 e size >= 4 (recebido: {count}, {size})"
            logger.error(error_msg)
            raise ValueError(error_msg)

        try:
            objects, backgrounds = synth_corpus(out, count, size, seed)
            return {
                "success": True,
                "message": f"Corpus de objectness gravado em '{out}'",
                "objects": objects,
                "backgrounds": backgrounds,
            }

        except Exception as e:
            error_msg = f"Erro ao gerar corpus de objectness: {str(e)}"
            logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "message": error_msg,
                "error": str(e),
            }
