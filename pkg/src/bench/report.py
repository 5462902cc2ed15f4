"""Relatórios de avaliação: CSV com as duas curvas e gráfico SVG."""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import EvalCurve, precision_at, success_auc  # noqa: E402

logger = logging.getLogger(__name__)

PRECISION_SECTION = "precision"
SUCCESS_SECTION = "success"
HEADERS = {PRECISION_SECTION: ("threshold", "value"), SUCCESS_SECTION: ("overlap", "value")}


def _format_number(value: float) -> str:
    return repr(float(value))


def emit_report(
    precision: EvalCurve,
    success: EvalCurve,
    csv_path: Union[str, Path],
    svg_path: Optional[Union[str, Path]] = None,
    title: Optional[str] = None,
) -> None:
    """
    Grava as curvas em CSV e, opcionalmente, em um SVG com dois gráficos.

    Formato do CSV:
        [precision]
        threshold,value
        0,1.0
        ...
        [success]
        overlap,value
        0.0,1.0
        ...

    Args:
        precision: Curva de precisão (limiares em pixels)
        success: Curva de sucesso (limiares de IoU)
        csv_path: Destino do CSV
        svg_path: Destino do SVG (opcional)
        title: Título dos gráficos (opcional)

    Raises:
        OSError: Se o caminho não puder ser escrito
    """
    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([f"[{PRECISION_SECTION}]"])
        writer.writerow(HEADERS[PRECISION_SECTION])
        for threshold, value in precision.samples:
            writer.writerow([_format_pixels(threshold), _format_number(value)])
        writer.writerow([f"[{SUCCESS_SECTION}]"])
        writer.writerow(HEADERS[SUCCESS_SECTION])
        for threshold, value in success.samples:
            writer.writerow([_format_number(threshold), _format_number(value)])
    logger.info(f"Relatório CSV gravado em {csv_path}")

    if svg_path is not None:
        plot_curves(precision, success, svg_path, title=title)


def _format_pixels(value: float) -> str:
    """Limiares inteiros em pixels saem sem casa decimal ('0', '20')."""
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def plot_curves(precision: EvalCurve, success: EvalCurve, svg_path: Union[str, Path], title: Optional[str] = None) -> None:
    """Gera um SVG autocontido com os gráficos de precisão e de sucesso."""
    plt.rcParams["svg.hashsalt"] = "gdt"
    fig, (ax_precision, ax_success) = plt.subplots(1, 2, figsize=(10, 4))
    try:
        ax_precision.plot(precision.thresholds, precision.values, color="tab:blue",
                          label=f"precisão@20 = {precision_at(precision):.3f}")
        ax_precision.set_xlabel("Limiar de erro de centro (pixels)")
        ax_precision.set_ylabel("Precisão")
        ax_precision.set_title("Gráfico de precisão")
        ax_precision.set_ylim(0.0, 1.05)
        ax_precision.grid(True, alpha=0.3)
        ax_precision.legend(loc="lower right")

        ax_success.plot(success.thresholds, success.values, color="tab:red",
                        label=f"AUC = {success_auc(success):.3f}")
        ax_success.set_xlabel("Limiar de sobreposição (IoU)")
        ax_success.set_ylabel("Taxa de sucesso")
        ax_success.set_title("Gráfico de sucesso")
        ax_success.set_xlim(0.0, 1.0)
        ax_success.set_ylim(0.0, 1.05)
        ax_success.grid(True, alpha=0.3)
        ax_success.legend(loc="lower left")

        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    logger.info(f"Gráfico SVG gravado em {svg_path}")


def read_report(csv_path: Union[str, Path]) -> Tuple[EvalCurve, EvalCurve]:
    """
    Lê um CSV gravado por emit_report.

    Returns:
        Tupla (curva de precisão, curva de sucesso)

    Raises:
        ValueError: Se faltar uma seção ou uma linha for malformada
    """
    sections: Dict[str, List[Tuple[float, float]]] = {}
    current: Optional[str] = None
    expect_header = False
    with open(csv_path, encoding="utf-8", newline="") as handle:
        for line_number, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) == 1 and row[0].startswith("[") and row[0].endswith("]"):
                current = row[0][1:-1]
                if current not in HEADERS:
                    raise ValueError(f"Seção desconhecida '{current}' na linha {line_number}")
                sections[current] = []
                expect_header = True
                continue
            if current is None:
                raise ValueError(f"Linha {line_number} fora de uma seção")
            if expect_header:
                if tuple(row) != HEADERS[current]:
                    raise ValueError(f"Cabeçalho inesperado na linha {line_number}: {row}")
                expect_header = False
                continue
            try:
                threshold, value = (float(cell) for cell in row)
            except ValueError as e:
                raise ValueError(f"Linha {line_number} malformada: {row}") from e
            sections[current].append((threshold, value))

    missing = [name for name in HEADERS if name not in sections]
    if missing:
        raise ValueError(f"Seções ausentes em {csv_path}: {', '.join(missing)}")
    return EvalCurve(tuple(sections[PRECISION_SECTION])), EvalCurve(tuple(sections[SUCCESS_SECTION]))
