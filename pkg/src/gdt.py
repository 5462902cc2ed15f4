"""Entry point da linha de comando do rastreador GDT."""

import sys
from pathlib import Path

# Adicionar diretório do projeto ao path para permitir imports absolutos quando executado diretamente
parent_dir = Path(__file__).parent.parent
if str(parent_dir) not in sys.path:
    sys.path.insert(0, str(parent_dir))

import logging
import logging.config
import os
from typing import List, Optional

from dotenv import load_dotenv

# Usar imports absolutos do pacote src para funcionar quando executado diretamente
from src.cli.cli import GdtCli

# Carregar variáveis de ambiente do arquivo .env no diretório raiz do projeto
env_file = parent_dir / ".env"
load_dotenv(env_file)

# Criar diretório log se não existir (deve ser criado antes do fileConfig)
log_dir = parent_dir / "log"
log_dir.mkdir(parents=True, exist_ok=True)

# GDT_LOG_INI permite apontar outro arquivo INI
config_file = Path(os.getenv("GDT_LOG_INI") or parent_dir / "logging.ini").resolve()
if config_file.exists():
    original_cwd = os.getcwd()
    try:
        # Mudar temporariamente para o diretório do projeto para resolver caminhos relativos no INI
        os.chdir(parent_dir)
        logging.config.fileConfig(config_file, disable_existing_loggers=False)
    finally:
        os.chdir(original_cwd)
else:
    # Fallback se arquivo não existir
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> None:
    """Função principal: executa um comando e sai com 0 (sucesso) ou 1 (falha)."""
    try:
        cli = GdtCli()
        sys.exit(cli.run(argv))

    except KeyboardInterrupt:
        logger.info("Execução interrompida pelo usuário")
        sys.exit(0)
    except Exception as e:
        logger.error(f"Erro fatal na execução do comando: {e}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
