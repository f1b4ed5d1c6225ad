import argparse
import logging
import sys
from typing import List, Optional

from vdkit import __version__
from vdkit.commands import MODULES
from vdkit.config import settings
from vdkit.config.pipeline import load_pipeline_config
from vdkit.exceptions import VdkitError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vdkit",
        description="Pipeline de dados e avaliação de robustez para detecção de vulnerabilidades em funções C/C++",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="Arquivo JSON de configuração do pipeline")
    parser.add_argument("--workers", type=int, default=None, help="Processos para o trabalho por registro")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Mais detalhes no log (-vv para DEBUG)")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    # Registro dos subcomandos
    for module in MODULES:
        module.register(subparsers)
    return parser


def configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.LOG_LEVEL, logging.INFO)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse: --help sai com 0, erros de uso com 2
        return e.code if isinstance(e.code, int) else 2

    configure_logging(args.verbose)
    try:
        config = load_pipeline_config(args.config, workers=args.workers)
        return args.handler(args, config)
    except VdkitError as e:
        # Tratamento de exceções: validação -> 1, fatal -> 2
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Exceção não tratada: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
