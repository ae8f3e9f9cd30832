"""Exception hierarchy. Every error carries a stable ``code`` string."""


class MasError(Exception):
    code = "E-INTERNAL"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    @property
    def message(self) -> str:
        return self.args[0]

    def __str__(self) -> str:
        return f"{self.code}: {self.args[0]}"


class ModelError(MasError):
    """Raised when an operation needs a validated model and gets one with errors."""

    code = "E-INVALID-MODEL"


class EvalError(MasError):
    code = "E-EVAL"


class EffectKindError(MasError):
    """An effect produced a value whose kind does not match the target variable."""

    code = "E-KIND-MISMATCH"

    def __init__(self, variable: str, expected: str, value):
        super().__init__(
            f"state variable {variable!r} expects {expected}, got {value!r}"
        )
        self.variable = variable


class PerceptionError(MasError):
    code = "E-INTERNAL-PERCEPT"


class InteractionError(MasError):
    code = "E-NO-INTERACTION"


class UnknownKeyError(MasError):
    code = "E-UNKNOWN-KEY"


class NoPlanError(MasError):
    code = "E-NO-PLAN"


class NoCandidateError(MasError):
    code = "E-NO-CANDIDATE"


class ProfileError(MasError):
    code = "E-NO-PROFILE"


class GenerateError(MasError):
    code = "E-IO"

    def __init__(self, message: str, path=None):
        super().__init__(message)
        self.path = path


class ChatError(MasError):
    code = "E-UNKNOWN-AGENT"


class ScriptError(MasError):
    code = "E-SCRIPT"

    def __init__(self, message: str, line: int, *, code: str | None = None):
        super().__init__(f"line {line}: {message}", code=code)
        self.line = line
