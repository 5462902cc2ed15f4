"""Serviço de rastreamento: OPE em uma sequência e gravação dos resultados."""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..bench.metrics import precision_at, precision_curve, success_auc, success_curve
from ..bench.protocol import run_ope
from ..bench.sequence import load_sequence, write_results
from ..tracking.config import TrackerConfig, config_summary, load_tracker_config
from ..tracking.state_store import save_state

logger = logging.getLogger(__name__)


class TrackingService:
    """Serviço para rastrear o alvo de uma sequência a partir do primeiro quadro."""

    def __init__(self, base_config: Optional[TrackerConfig] = None):
        """
        Inicializa o serviço de rastreamento.

        Args:
            base_config: Configuração sobre a qual os arquivos de configuração são aplicados
                (opcional, usa os valores padrão se não fornecida)
        """
        self.base_config = base_config or TrackerConfig()
        logger.info("TrackingService inicializado")

    def track(
        self,
        seq: str,
        out: str,
        config: Optional[str] = None,
        seed: Optional[int] = None,
        freeze_net: bool = False,
        no_pretrain: bool = False,
        state_out: Optional[str] = None,
        weights: Optional[str] = None,
    ) -> Dict[str, Any]:
        """
        Executa OPE na sequência e grava results.txt.

        Args:
            seq: Pasta da sequência (layout OTB)
            out: Destino do results.txt
            config: Arquivo de configuração `chave = valor` (opcional)
            seed: Semente (opcional, substitui a do arquivo)
            freeze_net: Não atualiza fc6/fc7 durante o rastreamento
            no_pretrain: Pula o pré-treino de objectness
            state_out: Destino do estado final (opcional)
            weights: Arquivo de pesos GDTW (opcional)

        Returns:
            Dict com resultado da operação:
                - success: bool
                - message: str
                - frames: int
                - updated_frames: int (quadros aceitos pelo portão)
                - precision20 / success_auc: float (contra o ground truth da sequência)

        Raises:
            ValueError: Se seq ou out estiverem vazios ou a semente for negativa
        """
        if not seq or not str(seq).strip():
            error_msg = "seq não pode estar vazio"
            logger.error(error_msg)
            raise ValueError(error_msg)

        if not out or not str(out).strip():
            error_msg = "out não pode estar vazio"
            logger.error(error_msg)
            raise ValueError(error_msg)

        if seed is not None and seed < 0:
            error_msg = f"seed não pode ser negativa (recebido: {seed})"
            logger.error(error_msg)
            raise ValueError(error_msg)

        try:
            cfg = load_tracker_config(config, base=self.base_config)
            overrides: Dict[str, Any] = {}
            if seed is not None:
                overrides["seed"] = seed
            if freeze_net:
                overrides["freeze_net"] = True
            if no_pretrain:
                overrides["pretrain"] = False
            if weights:
                overrides["weights"] = weights
            if overrides:
                cfg = cfg.with_overrides(**overrides)
            logger.info(f"Iniciando rastreamento: seq='{seq}', seed={cfg.seed}, freeze_net={cfg.freeze_net}, "
                        f"pretrain={cfg.pretrain}")

            sequence = load_sequence(seq)
            run = run_ope(sequence, cfg)
            write_results(out, run.boxes)
            if state_out:
                save_state(run.state, state_out)

            precision20 = precision_at(precision_curve(run.boxes, sequence.gt))
            auc = success_auc(success_curve(run.boxes, sequence.gt))
            logger.info(f"Rastreamento concluído para '{sequence.name}': precisão@20 {precision20:.3f}, AUC {auc:.3f}")

            return {
                "success": True,
                "message": f"Sequência '{sequence.name}' rastreada com sucesso",
                "sequence": sequence.name,
                "frames": len(run.boxes),
                "updated_frames": sum(run.updated[1:]),
                "precision20": precision20,
                "success_auc": auc,
                "results": str(Path(out)),
                "state": str(Path(state_out)) if state_out else None,
                "config": config_summary(cfg),
            }

        except Exception as e:
            error_msg = f"Erro ao rastrear sequência: {str(e)}"
            logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "message": error_msg,
                "error": str(e),
            }
