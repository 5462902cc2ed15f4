"""Serviço de benchmark: suíte de sequências e escada de ablação."""

import logging
from typing import Any, Dict, List, Optional

from ..bench.protocol import ABLATION_LADDER, run_ablation, run_suite
from ..bench.report import emit_report
from ..tracking.config import TrackerConfig, load_tracker_config

logger = logging.getLogger(__name__)


def _validate_sequences(seqs: List[str]) -> None:
    if not seqs or any(not str(seq).strip() for seq in seqs):
        error_msg = "seqs deve conter ao menos uma pasta de sequência não vazia"
        logger.error(error_msg)
        raise ValueError(error_msg)


class BenchmarkService:
    """Serviço para avaliar o rastreador em várias sequências."""

    def __init__(self, base_config: Optional[TrackerConfig] = None):
        self.base_config = base_config or TrackerConfig()
        logger.info("BenchmarkService inicializado")

    def bench(
        self,
        seqs: List[str],
        config: Optional[str] = None,
        seed: Optional[int] = None,
        csv: Optional[str] = None,
        svg: Optional[str] = None,
        workers: Optional[int] = None,
    ) -> Dict[str, Any]:
        """
        Executa OPE em todas as sequências e agrega as curvas.

        Args:
            seqs: Pastas das sequências
            config: Arquivo de configuração (opcional)
            seed: Semente (opcional, substitui a do arquivo)
            csv: Destino do CSV com as curvas médias (opcional)
            svg: Destino do SVG (opcional)
            workers: Processos paralelos (padrão: GDT_WORKERS)

        Returns:
            Dict com success, precision20, success_auc, sequences (por sequência) e attributes

        Raises:
            ValueError: Se a lista de sequências estiver vazia
        """
        _validate_sequences(seqs)

        if seed is not None and seed < 0:
            error_msg = f"seed não pode ser negativa (recebido: {seed})"
            logger.error(error_msg)
            raise ValueError(error_msg)

        try:
            cfg = load_tracker_config(config, base=self.base_config)
            if seed is not None:
                cfg = cfg.with_seed(seed)
            logger.info(f"Iniciando benchmark: {len(seqs)} sequências, seed={cfg.seed}")
            suite = run_suite(seqs, cfg, workers)
            if csv:
                emit_report(suite.precision, suite.success, csv, svg, title=f"{len(seqs)} sequências")

            return {
                "success": True,
                "message": f"Benchmark concluído em {len(seqs)} sequências",
                "precision20": suite.precision20,
                "success_auc": suite.auc,
                "seed": cfg.seed,
                "sequences": [
                    {
                        "name": result.name,
                        "attributes": sorted(result.attributes),
                        "precision20": result.precision20,
                        "success_auc": result.auc,
                    }
                    for result in suite.sequences
                ],
                "attributes": suite.attributes,
            }

        except Exception as e:
            error_msg = f"Erro no benchmark: {str(e)}"
            logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "message": error_msg,
                "error": str(e),
            }

    def ablate(
        self,
        seqs: List[str],
        seeds: List[int],
        config: Optional[str] = None,
        configurations: Optional[List[str]] = None,
        workers: Optional[int] = None,
    ) -> Dict[str, Any]:
        """
        Executa a escada de ablação (full, no_bp, no_obj_general, ...) sobre as sequências.

        Returns:
            Dict com success e rows (uma por configuração, com médias sobre as sementes)

        Raises:
            ValueError: Se não houver sequências, sementes ou se alguma configuração for desconhecida
        """
        _validate_sequences(seqs)

        if not seeds:
            error_msg = "seeds deve conter ao menos uma semente"
            logger.error(error_msg)
            raise ValueError(error_msg)

        unknown = [name for name in configurations or [] if name not in ABLATION_LADDER]
        if unknown:
            error_msg = f"Configurações desconhecidas: {', '.join(unknown)} (use {', '.join(ABLATION_LADDER)})"
            logger.error(error_msg)
            raise ValueError(error_msg)

        try:
            cfg = load_tracker_config(config, base=self.base_config)
            logger.info(f"Iniciando ablação: {len(seqs)} sequências, sementes {list(seeds)}")
            rows = run_ablation(seqs, seeds, cfg, configurations, workers)

            return {
                "success": True,
                "message": f"Ablação concluída: {len(rows)} configurações",
                "rows": rows,
            }

        except Exception as e:
            error_msg = f"Erro na ablação: {str(e)}"
            logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "message": error_msg,
                "error": str(e),
            }
