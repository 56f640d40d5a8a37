"""Exception hierarchy shared across the toolkit.

Everything raised deliberately by the library derives from :class:`TTXAIError`,
so the CLI can map library failures onto its exit-code contract (1 for
validation problems, 2 for IO/runtime failures).
"""


class TTXAIError(Exception):
    """Base class for all deliberate toolkit errors."""


class ConfigError(TTXAIError):
    """Invalid configuration value or unknown config key."""


class CorpusError(TTXAIError):
    """Corpus loading, labeling, preprocessing, or fold construction failed."""


class KeywordError(TTXAIError):
    """Keyword-extraction pipeline could not run on the given note."""


class GazetteerError(TTXAIError):
    """Gazetteer file is malformed or internally inconsistent."""


class ClassifierError(TTXAIError):
    """Classifier training, prediction, or adapter transport failed."""


class ExplainError(TTXAIError):
    """Focus-set construction or surrogate fitting failed."""


class FidelityError(TTXAIError):
    """Deletion-curve computation or export failed."""


class ReasoningError(TTXAIError):
    """Prompt construction, LLM transport, or judge parsing failed."""


class BenchError(TTXAIError):
    """Synthetic benchmark specification or oracle request is invalid."""
