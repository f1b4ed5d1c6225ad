import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
    desc: Optional[str] = None,
    chunksize: int = 16,
) -> List[R]:
    """Aplica `fn` a cada item preservando a ordem de entrada.

    Com workers > 1 usa processos; `fn` precisa ser uma função de módulo (picklable).
    Cada processo cria o próprio parser do tree-sitter sob demanda.
    """
    items = list(items)
    disable = desc is None or not logger.isEnabledFor(logging.INFO)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=disable)]
    logger.debug(f"Processando {len(items)} itens com {workers} processos")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(fn, items, chunksize=chunksize), total=len(items), desc=desc, disable=disable))
