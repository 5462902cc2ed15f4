"""One-Pass Evaluation, execução em lote de sequências e escada de ablação."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence as Seq, Union

import numpy as np

from ..imaging.geometry import BoundingBox
from ..imaging.image_io import load_image
from ..network.backbone import Network
from ..tracking.config import TrackerConfig
from ..tracking.tracker import TrackerState, initialize, track_frame
from .metrics import (
    EvalCurve,
    SequenceScores,
    attribute_report,
    mean_curve,
    precision_at,
    precision_curve,
    success_auc,
    success_curve,
)
from .sequence import Sequence, load_sequence

logger = logging.getLogger(__name__)

WORKERS_ENV = "GDT_WORKERS"

# nome -> alterações sobre a configuração base
ABLATION_LADDER: Dict[str, Dict[str, object]] = {
    "full": {"pretrain": True, "freeze_net": False},
    "no_bp": {"pretrain": True, "freeze_net": True},
    "no_obj_general": {"pretrain": False, "freeze_net": False},
    "no_obj_general_no_bp": {"pretrain": False, "freeze_net": True},
    "obj_general_only": {"pretrain": True, "init_iterations": 0, "freeze_net": False},
    "obj_general_only_no_bp": {"pretrain": True, "init_iterations": 0, "freeze_net": True},
    "pre_trained": {"pretrain": False, "init_iterations": 0, "freeze_net": False},
    "pre_trained_no_bp": {"pretrain": False, "init_iterations": 0, "freeze_net": True},
}


@dataclass
class OpeRun:
    """
    Resultado de uma execução OPE.

    Attributes:
        boxes: Uma box por quadro (a primeira é o ground truth)
        scores: Score de cada quadro (NaN no primeiro)
        updated: Se o quadro passou pelo portão de confiança
        state: Estado final do rastreador
    """

    boxes: List[BoundingBox]
    scores: List[float]
    updated: List[bool]
    state: TrackerState

    def __len__(self) -> int:
        return len(self.boxes)


def run_ope(seq: Sequence, tracker_cfg: Optional[TrackerConfig] = None, net: Optional[Network] = None) -> OpeRun:
    """
    Inicializa no ground truth do primeiro quadro e rastreia até o fim, sem reinicializar.

    Args:
        seq: Sequência carregada
        tracker_cfg: Configuração do rastreador
        net: Rede de partida (opcional, ver resolve_network)

    Returns:
        OpeRun: Boxes previstas (len = número de quadros), scores e estado final
    """
    cfg = tracker_cfg or TrackerConfig()
    logger.info(f"OPE em {seq.name}: {len(seq)} quadros, seed={cfg.seed}")
    state = initialize(load_image(seq.frames[0]), seq.gt[0], cfg, net)
    boxes, scores, updated = [seq.gt[0]], [float("nan")], [True]
    for path in seq.frames[1:]:
        box, best_score = track_frame(state, load_image(path))
        boxes.append(box)
        scores.append(best_score)
        updated.append(state.last_update_frame == state.frame_index)
    logger.info(f"OPE em {seq.name} concluída: {sum(updated[1:])}/{len(seq) - 1} quadros atualizados")
    return OpeRun(boxes=boxes, scores=scores, updated=updated, state=state)


def evaluate_sequence(seq_dir: Union[str, Path], cfg: TrackerConfig) -> SequenceScores:
    """Executa OPE em uma pasta e devolve as curvas da sequência."""
    seq = load_sequence(seq_dir)
    run = run_ope(seq, cfg)
    return SequenceScores(
        name=seq.name,
        attributes=seq.attributes,
        precision=precision_curve(run.boxes, seq.gt),
        success=success_curve(run.boxes, seq.gt),
    )


def worker_count(workers: Optional[int] = None) -> int:
    """Número de processos: argumento explícito ou GDT_WORKERS (padrão 1)."""
    if workers is None:
        try:
            workers = int(os.getenv(WORKERS_ENV, "1"))
        except ValueError:
            logger.warning(f"{WORKERS_ENV} inválido ({os.getenv(WORKERS_ENV)!r}); usando 1")
            workers = 1
    return max(1, workers)


@dataclass
class SuiteResult:
    """Curvas por sequência, curvas médias e relatório por atributo."""

    sequences: List[SequenceScores]
    precision: EvalCurve
    success: EvalCurve
    attributes: List[Dict[str, object]] = field(default_factory=list)

    @property
    def precision20(self) -> float:
        return precision_at(self.precision)

    @property
    def auc(self) -> float:
        return success_auc(self.success)


def run_suite(seq_dirs: Seq[Union[str, Path]], cfg: TrackerConfig, workers: Optional[int] = None) -> SuiteResult:
    """
    OPE sobre várias sequências, em paralelo quando workers > 1.

    Cada processo recebe só o caminho e a configuração; a agregação é feita aqui.
    """
    if not seq_dirs:
        raise ValueError("run_suite requer ao menos uma sequência")
    count = min(worker_count(workers), len(seq_dirs))
    if count > 1:
        with ProcessPoolExecutor(max_workers=count) as executor:
            results = list(executor.map(evaluate_sequence, seq_dirs, [cfg] * len(seq_dirs)))
    else:
        results = [evaluate_sequence(seq_dir, cfg) for seq_dir in seq_dirs]

    suite = SuiteResult(
        sequences=results,
        precision=mean_curve([r.precision for r in results]),
        success=mean_curve([r.success for r in results]),
        attributes=attribute_report(results),
    )
    logger.info(f"Suíte concluída: {len(results)} sequências, precisão@20 {suite.precision20:.3f}, AUC {suite.auc:.3f}")
    return suite


def run_ablation(
    seq_dirs: Seq[Union[str, Path]],
    seeds: Seq[int],
    base_cfg: Optional[TrackerConfig] = None,
    configurations: Optional[Seq[str]] = None,
    workers: Optional[int] = None,
) -> List[Dict[str, object]]:
    """
    Executa a escada de ablação sobre as sequências para cada semente.

    Args:
        seq_dirs: Pastas das sequências
        seeds: Sementes
        base_cfg: Configuração base (padrão: TrackerConfig())
        configurations: Subconjunto de ABLATION_LADDER (padrão: todas, na ordem da escada)
        workers: Processos por suíte

    Returns:
        Uma linha por configuração: {configuration, precision20, success_auc, per_seed}
    """
    base_cfg = base_cfg or TrackerConfig()
    names = list(configurations or ABLATION_LADDER)
    unknown = [name for name in names if name not in ABLATION_LADDER]
    if unknown:
        raise ValueError(f"Configurações de ablação desconhecidas: {', '.join(unknown)}")
    if not seeds:
        raise ValueError("run_ablation requer ao menos uma semente")

    rows = []
    for name in names:
        per_seed = []
        for seed in seeds:
            cfg = base_cfg.with_overrides(**ABLATION_LADDER[name]).with_seed(seed)
            suite = run_suite(seq_dirs, cfg, workers)
            per_seed.append({"seed": seed, "precision20": suite.precision20, "success_auc": suite.auc})
        rows.append({
            "configuration": name,
            "precision20": float(np.mean([item["precision20"] for item in per_seed])),
            "success_auc": float(np.mean([item["success_auc"] for item in per_seed])),
            "per_seed": per_seed,
        })
        logger.info(f"Ablação {name}: AUC média {rows[-1]['success_auc']:.3f}")
    return rows
