"""Interface de linha de comando do rastreador GDT."""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..services.benchmark_service import BenchmarkService
from ..services.evaluation_service import EvaluationService
from ..services.pretrain_service import PretrainService
from ..services.synthesis_service import SynthesisService
from ..services.tracking_service import TrackingService

# Logger será configurado no entry point (gdt.py)
logger = logging.getLogger(__name__)

# Caminho para diretório com as definições dos comandos
COMMANDS_DIR = Path(__file__).parent / "commands"

COMMAND_NAMES = ["track", "eval", "synth", "pretrain", "synth-corpus", "bench", "ablate"]


def parse_pair(text: str) -> Tuple[float, float]:
    """Converte 'VX,VY' em (vx, vy)."""
    parts = text.split(",")
    try:
        if len(parts) != 2:
            raise ValueError(text)
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"esperado VX,VY (recebido: {text!r})")


def parse_interval(text: str) -> Tuple[int, int]:
    """Converte 'A:B' em (a, b) com 1 <= a < b."""
    parts = text.split(":")
    try:
        if len(parts) != 2:
            raise ValueError(text)
        start, end = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"esperado A:B (recebido: {text!r})")
    if not 1 <= start < end:
        raise argparse.ArgumentTypeError(f"intervalo deve satisfazer 1 <= A < B (recebido: {text!r})")
    return start, end


def parse_size(text: str) -> Tuple[int, int]:
    """Converte 'LxA' em (largura, altura)."""
    parts = text.lower().split("x")
    try:
        if len(parts) != 2:
            raise ValueError(text)
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"esperado LxA (recebido: {text!r})")


# tipo declarado no JSON -> conversor do argparse
ARGUMENT_TYPES: Dict[str, Callable[[str], Any]] = {
    "string": str,
    "integer": int,
    "number": float,
    "pair": parse_pair,
    "interval": parse_interval,
    "size": parse_size,
}


def load_command_definition(command_name: str) -> Dict[str, Any]:
    """
    Carrega definição de um comando a partir de arquivo JSON.

    Args:
        command_name: Nome do comando (ex: 'track', 'eval')

    Returns:
        Dict com definição do comando

    Raises:
        FileNotFoundError: Se arquivo não existir
        json.JSONDecodeError: Se arquivo JSON for inválido
    """
    command_file = COMMANDS_DIR / f"{command_name}.json"
    if not command_file.exists():
        raise FileNotFoundError(f"Arquivo de definição do comando '{command_name}' não encontrado: {command_file}")

    with open(command_file, "r", encoding="utf-8") as f:
        return json.load(f)


def _add_argument(parser: argparse.ArgumentParser, spec: Dict[str, Any]) -> None:
    kind = spec.get("type", "string")
    options: Dict[str, Any] = {"dest": spec["dest"], "help": spec.get("help")}
    if kind == "boolean":
        options["action"] = "store_true"
    else:
        if kind not in ARGUMENT_TYPES:
            raise ValueError(f"Tipo de argumento desconhecido '{kind}' em {spec['flags']}")
        options["type"] = ARGUMENT_TYPES[kind]
        if "nargs" in spec:
            options["nargs"] = spec["nargs"]
        if spec.get("required"):
            options["required"] = True
        if "default" in spec:
            options["default"] = spec["default"]
    parser.add_argument(*spec["flags"], **options)


def build_parser(command_names: Optional[List[str]] = None) -> argparse.ArgumentParser:
    """Monta o parser com um sub-parser por comando declarado em commands/."""
    parser = argparse.ArgumentParser(
        prog="gdt",
        description="Rastreador GDT: naive Bayes gaussiano sobre features de CNN, com bancada OPE.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMANDO")
    subparsers.required = True
    for command_name in command_names or COMMAND_NAMES:
        definition = load_command_definition(command_name)
        subparser = subparsers.add_parser(
            definition["name"], help=definition["description"], description=definition["description"]
        )
        for spec in definition.get("arguments", []):
            _add_argument(subparser, spec)
        logger.debug(f"Comando '{command_name}' carregado de {COMMANDS_DIR / f'{command_name}.json'}")
    return parser


class GdtCli:
    """Despacha cada comando para o método de serviço correspondente."""

    def __init__(
        self,
        tracking_service: Optional[TrackingService] = None,
        evaluation_service: Optional[EvaluationService] = None,
        synthesis_service: Optional[SynthesisService] = None,
        pretrain_service: Optional[PretrainService] = None,
        benchmark_service: Optional[BenchmarkService] = None,
    ):
        self.tracking_service = tracking_service or TrackingService()
        self.evaluation_service = evaluation_service or EvaluationService()
        self.synthesis_service = synthesis_service or SynthesisService()
        self.pretrain_service = pretrain_service or PretrainService()
        self.benchmark_service = benchmark_service or BenchmarkService()
        self.handlers: Dict[str, Callable[[argparse.Namespace], Dict[str, Any]]] = {
            "track": self._handle_track,
            "eval": self._handle_eval,
            "synth": self._handle_synth,
            "pretrain": self._handle_pretrain,
            "synth-corpus": self._handle_synth_corpus,
            "bench": self._handle_bench,
            "ablate": self._handle_ablate,
        }
        self.parser = build_parser(list(self.handlers))
        logger.info("GdtCli inicializado")

    def _handle_track(self, args: argparse.Namespace) -> Dict[str, Any]:
        return self.tracking_service.track(
            seq=args.seq,
            out=args.out,
            config=args.config,
            seed=args.seed,
            freeze_net=args.freeze_net,
            no_pretrain=args.no_pretrain,
            state_out=args.state_out,
            weights=args.weights,
        )

    def _handle_eval(self, args: argparse.Namespace) -> Dict[str, Any]:
        return self.evaluation_service.evaluate(results=args.results, gt=args.gt, csv=args.csv, svg=args.svg)

    def _handle_synth(self, args: argparse.Namespace) -> Dict[str, Any]:
        return self.synthesis_service.synth(
            out=args.out,
            frames=args.frames,
            seed=args.seed,
            velocity=args.velocity,
            occlude=args.occlude,
            noise=args.noise,
            scale_drift=args.scale_drift,
            width=args.width,
            height=args.height,
            target=args.target,
        )

    def _handle_pretrain(self, args: argparse.Namespace) -> Dict[str, Any]:
        return self.pretrain_service.pretrain(
            corpus=args.corpus, iters=args.iters, out=args.out, seed=args.seed, config=args.config
        )

    def _handle_synth_corpus(self, args: argparse.Namespace) -> Dict[str, Any]:
        return self.synthesis_service.synth_corpus(out=args.out, count=args.count, size=args.size, seed=args.seed)

    def _handle_bench(self, args: argparse.Namespace) -> Dict[str, Any]:
        return self.benchmark_service.bench(
            seqs=args.seqs, config=args.config, seed=args.seed, csv=args.csv, svg=args.svg, workers=args.workers
        )

    def _handle_ablate(self, args: argparse.Namespace) -> Dict[str, Any]:
        return self.benchmark_service.ablate(
            seqs=args.seqs,
            seeds=args.seeds,
            config=args.config,
            configurations=args.configurations,
            workers=args.workers,
        )

    def dispatch(self, args: argparse.Namespace) -> Dict[str, Any]:
        """
        Executa o comando já analisado.

        Returns:
            Dict devolvido pelo serviço; ValueError de pré-condição vira
            {"success": False, "message": ..., "error": ...}
        """
        logger.info(f"Comando: {args.command}")
        try:
            return self.handlers[args.command](args)
        except ValueError as e:
            return {"success": False, "message": f"Argumentos inválidos para '{args.command}': {e}", "error": str(e)}

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Analisa argv, executa o comando e imprime o resultado em JSON no stdout.

        Returns:
            0 em sucesso, 1 se o serviço reportar falha (argparse sai com 2 em argumentos inválidos)
        """
        args = self.parser.parse_args(argv)
        result = self.dispatch(args)
        print(json.dumps(result, ensure_ascii=False, indent=2), flush=True)
        return 0 if result.get("success") else 1
