"""Hierarquia de exceções do vdkit.

`exit_code` define como o CLI reporta a falha: 1 para falhas de validação
(entrada inconsistente, regra não aplicável), 2 para erros fatais.
"""


class VdkitError(Exception):
    exit_code = 2


class ValidationFailure(VdkitError):
    exit_code = 1


# core-parse
class ParseFailure(ValidationFailure):
    pass


class EncodingError(ValidationFailure):
    pass


# perturb
class IneligibleSite(ValidationFailure):
    pass


class RewriteProducedParseError(VdkitError):
    pass


# slice
class EmptySlice(ValidationFailure):
    pass


# dataset
class DatasetIOError(VdkitError):
    pass


class FormatError(ValidationFailure):
    def __init__(self, message: str, line_number: int = 0):
        super().__init__(message)
        self.line_number = line_number


class MissingDateError(ValidationFailure):
    pass


class EmptyTrainingPositives(ValidationFailure):
    pass


# prompt
class InsufficientShots(ValidationFailure):
    pass


# eval
class EndpointError(VdkitError):
    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class AuthError(EndpointError):
    pass


class EmptyInputError(ValidationFailure):
    pass


class MisalignedInputError(ValidationFailure):
    pass


class ConfigError(ValidationFailure):
    pass
