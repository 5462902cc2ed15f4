"""Serviço de pré-treino de objectness."""

import logging
from typing import Any, Dict, Optional

from ..network.weights import save_weights
from ..tracking.config import TrackerConfig, load_tracker_config
from ..tracking.pretrain import pretrain_objectness

logger = logging.getLogger(__name__)


class PretrainService:
    """Serviço para pré-treinar o backbone em um corpus objeto/fundo e salvar os pesos."""

    def __init__(self, base_config: Optional[TrackerConfig] = None):
        self.base_config = base_config or TrackerConfig()
        logger.info("PretrainService inicializado")

    def pretrain(
        self,
        corpus: str,
        iters: int,
        out: str,
        seed: Optional[int] = None,
        config: Optional[str] = None,
    ) -> Dict[str, Any]:
        """
        Pré-treina todas as camadas e grava os pesos em GDTW.

        Args:
            corpus: Pasta com object/ e background/
            iters: Iterações de SGD
            out: Destino dos pesos
            seed: Semente (opcional, substitui a do arquivo)
            config: Arquivo de configuração (arquitetura, taxa e lote do pré-treino)

        Returns:
            Dict com success, message, weights e iterations

        Raises:
            ValueError: Se corpus/out estiverem vazios ou iters/seed forem negativos
        """
        if not corpus or not str(corpus).strip():
            error_msg = "corpus não pode estar vazio"
            logger.error(error_msg)
            raise ValueError(error_msg)

        if not out or not str(out).strip():
            error_msg = "out não pode estar vazio"
            logger.error(error_msg)
            raise ValueError(error_msg)

        if iters < 0 or (seed is not None and seed < 0):
            error_msg = f"iters e seed não podem ser negativos (recebido: {iters}, {seed})"
            logger.error(error_msg)
            raise ValueError(error_msg)

        try:
            cfg = load_tracker_config(config, base=self.base_config)
            if seed is not None:
                cfg = cfg.with_seed(seed)
            net = pretrain_objectness(corpus, iters, cfg)
            save_weights(net, out)

            return {
                "success": True,
                "message": f"Pesos pré-treinados gravados em '{out}'",
                "weights": out,
                "iterations": iters,
                "seed": cfg.seed,
            }

        except Exception as e:
            error_msg = f"Erro no pré-treino de objectness: {str(e)}"
            logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "message": error_msg,
                "error": str(e),
            }
