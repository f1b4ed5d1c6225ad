import hashlib
import logging
import random
from typing import Dict, List, Optional, Sequence

from vdkit.exceptions import InsufficientShots
from vdkit.schemas.function import SourceFunction
from vdkit.schemas.prompt import PromptBundle, PromptSetting, PromptType, Shot
from vdkit.services.audit import complete_pairs
from vdkit.services.parser import ParserService
from vdkit.services.views import StructViewService

logger = logging.getLogger(__name__)

SYSTEM_ROLE = "You are a code security expert who excels at detecting vulnerabilities"
QUESTION = "Is the following function vulnerable? Please answer Yes or No."
YES, NO = "Yes", "No"

# Campos extras do registro repassados ao log de inferência
TAG_FIELDS = ("transform_kind", "site_index", "origin_id", "normalization", "abstracted", "sliced")

_SECTION_TITLES = {
    PromptType.FLAT_AST: "Flattened AST",
    PromptType.API_CALLS: "API call",
    PromptType.DATA_FLOW: "Data flow",
}


def record_tags(func: SourceFunction) -> Dict[str, str]:
    extra = func.model_extra or {}
    return {key: str(extra[key]) for key in TAG_FIELDS if extra.get(key) is not None}


def record_seed(seed: int, record_id: str) -> int:
    """Semente estável por registro, independente da ordem de processamento."""
    digest = hashlib.sha256(f"{seed}:{record_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class PromptService:
    @staticmethod
    def render_view(func: SourceFunction, prompt_type: PromptType) -> str:
        """Código cru, seguido da visão estrutural quando o tipo pede uma."""
        prompt_type = PromptType(prompt_type)
        if prompt_type is PromptType.RAW_CODE:
            return func.code
        tree = ParserService.parse_function(func)
        if prompt_type is PromptType.FLAT_AST:
            view = StructViewService.flatten_ast(tree)
        elif prompt_type is PromptType.API_CALLS:
            view = StructViewService.api_call_view(tree)
        else:
            _, view = StructViewService.data_flow_view(tree)
        return f"{func.code}\n\n{_SECTION_TITLES[prompt_type]}:\n{view}"

    @staticmethod
    def user_message(func: SourceFunction, prompt_type: PromptType) -> str:
        return f"{QUESTION}\n{PromptService.render_view(func, prompt_type)}"

    @staticmethod
    def sample_shots(
        func: SourceFunction,
        prompt_type: PromptType,
        train_pool: Sequence[SourceFunction],
        seed: int,
    ) -> List[Shot]:
        pairs = complete_pairs(train_pool)
        candidates = sorted(pair_id for pair_id in pairs if pair_id != func.pair_id)
        if len(candidates) < 2:
            raise InsufficientShots(f"Pool de treino tem {len(candidates)} pares completos; são necessários 2")
        shots = []
        for pair_id in random.Random(seed).sample(candidates, 2):
            # Vulnerável primeiro dentro de cada par
            for member in pairs[pair_id]:
                shots.append(Shot(
                    user=PromptService.user_message(member, prompt_type),
                    assistant=YES if member.is_vulnerable else NO,
                ))
        return shots

    @staticmethod
    def build_prompt(
        func: SourceFunction,
        prompt_type: PromptType = PromptType.RAW_CODE,
        setting: PromptSetting = PromptSetting.ZERO_SHOT,
        train_pool: Optional[Sequence[SourceFunction]] = None,
        seed: int = 0,
    ) -> PromptBundle:
        prompt_type, setting = PromptType(prompt_type), PromptSetting(setting)
        shots: List[Shot] = []
        if setting is PromptSetting.FEW_SHOT:
            shots = PromptService.sample_shots(func, prompt_type, train_pool or [], seed)
        return PromptBundle(
            record_id=func.id,
            system=SYSTEM_ROLE,
            shots=shots,
            user=PromptService.user_message(func, prompt_type),
            prompt_type=prompt_type,
            setting=setting,
            label=func.label,
            cwe=func.primary_cwe,
            tags=record_tags(func),
        )
