import logging

from vdkit.commands.common import add_output, emit_jsonl, load_assignment, load_records, resolve
from vdkit.config.pipeline import PipelineConfig
from vdkit.exceptions import ConfigError
from vdkit.schemas.dataset import Split
from vdkit.schemas.prompt import PromptSetting, PromptType
from vdkit.services.prompt import PromptService, record_seed

logger = logging.getLogger(__name__)


def build_prompts(args, config: PipelineConfig) -> int:
    records = load_records(args.input)
    prompt_type, setting = PromptType(args.type), PromptSetting(args.setting)
    seed = resolve(args, config, "seed")

    targets, pool = records, []
    if args.splits:
        assignment = load_assignment(args.splits)
        targets = [r for r in records if assignment.split_of(r.id) is Split(args.target_split)]
        pool = [r for r in records if assignment.split_of(r.id) is Split.TRAIN]
    if args.pool:
        pool = load_records(args.pool)
    if setting is PromptSetting.FEW_SHOT and not pool:
        raise ConfigError("FewShot precisa de --splits ou --pool para o conjunto de exemplos")

    bundles = [
        PromptService.build_prompt(record, prompt_type, setting, pool, record_seed(seed, record.id))
        for record in targets
    ]
    emit_jsonl(({**b.model_dump(mode="json"), "messages": b.to_messages()} for b in bundles), args.output)
    logger.info(f"{len(bundles)} prompts {setting.value}/{prompt_type.value} gerados")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("prompt", help="Monta prompts zero-shot/few-shot nos quatro tipos")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--type", choices=[t.value for t in PromptType], default=PromptType.RAW_CODE.value)
    parser.add_argument("--setting", choices=[s.value for s in PromptSetting], default=PromptSetting.ZERO_SHOT.value)
    parser.add_argument("--splits", default=None, help="Partição: alvo em --target-split, exemplos do Train")
    parser.add_argument("--target-split", choices=[s.value for s in Split], default=Split.TEST.value)
    parser.add_argument("--pool", default=None, help="Corpus JSONL com os pares de exemplo")
    parser.add_argument("--seed", type=int, default=None)
    add_output(parser, "Bundles de prompt (JSONL)")
    parser.set_defaults(handler=build_prompts)
