# Configurações lidas do ambiente
# Em produção, estes valores devem vir de variáveis de ambiente ou do arquivo .env

import os
from typing import Optional

from dotenv import load_dotenv

# Tenta carregar variáveis de .env, se existir
load_dotenv()

# Endpoint de chat (compatível com /v1/chat/completions)
ENDPOINT_URL = os.getenv("VDKIT_ENDPOINT_URL", "http://localhost:8000/v1/chat/completions")
MODEL_NAME = os.getenv("VDKIT_MODEL", "gpt-4o-mini")
# Nome da variável que guarda o token; o valor nunca vai para os logs
API_KEY_ENV = "VDKIT_API_KEY"
CONCURRENCY = int(os.getenv("VDKIT_CONCURRENCY", "4"))

# Execução local
WORKERS = int(os.getenv("VDKIT_WORKERS", "1"))
LOG_LEVEL = os.getenv("VDKIT_LOG_LEVEL", "INFO").upper()

# Valores padrão do pipeline
DEFAULT_SEED = int(os.getenv("VDKIT_SEED", "42"))
DEFAULT_BUDGET = 512
DEFAULT_RATIOS = (8, 1, 1)


def get_api_key() -> Optional[str]:
    return os.getenv(API_KEY_ENV)
