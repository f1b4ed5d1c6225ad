import re

from vdkit.schemas.perturb import NormalizationRule

_ANY_WHITESPACE = re.compile(r"\s+")
_HORIZONTAL = re.compile(r"[ \t\f\v]+")


class NormalizationService:
    @staticmethod
    def codexglue_clean(code: str) -> str:
        """Colapsa qualquer sequência de espaços, \\t e \\n em um único espaço."""
        return _ANY_WHITESPACE.sub(" ", code)

    @staticmethod
    def pdbert_clean(code: str) -> str:
        """Colapsa espaços e \\t, preserva as quebras de linha e remove espaços no fim de cada linha."""
        lines = code.replace("\r\n", "\n").replace("\r", "\n").split("\n")
        return "\n".join(_HORIZONTAL.sub(" ", line).rstrip() for line in lines)

    @staticmethod
    def normalize(code: str, rule: NormalizationRule) -> str:
        rule = NormalizationRule(rule)
        if rule is NormalizationRule.CODEXGLUE:
            return NormalizationService.codexglue_clean(code)
        if rule is NormalizationRule.PDBERT:
            return NormalizationService.pdbert_clean(code)
        return code
