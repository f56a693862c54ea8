"""
Exception hierarchy for Knowledge Growth
"""

from typing import Optional


class KnowledgeGrowthError(Exception):
    """Base class for every error raised by the pipeline"""


class CorpusError(KnowledgeGrowthError, ValueError):
    """Raised when an article source cannot be read or parsed"""

    def __init__(self, message: str, offset: Optional[int] = None, page: Optional[str] = None):
        super().__init__(message)
        self.offset = offset
        self.page = page

    def __reduce__(self):
        return self.__class__, (str(self), self.offset, self.page)


class SchemaError(KnowledgeGrowthError, ValueError):
    """Raised when a JSON artifact does not match its schema; `field` is a dotted path"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message

    def __reduce__(self):
        return self.__class__, (self.field, self.message)


class ConfigError(SchemaError):
    """A run parameter is outside its documented range"""


class AnalysisError(KnowledgeGrowthError, ValueError):
    """Raised when a statistic or model is undefined for the given input"""


class MissingArtifactError(KnowledgeGrowthError):
    """An upstream artifact is absent; names the subcommand that produces it"""

    def __init__(self, path: str, subcommand: str):
        super().__init__(f"missing artifact {path}; run `{subcommand}` first")
        self.path = path
        self.subcommand = subcommand

    def __reduce__(self):
        return self.__class__, (self.path, self.subcommand)
