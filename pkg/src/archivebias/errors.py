"""Exception hierarchy shared across the pipeline."""


class ArchiveBiasError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ArchiveBiasError):
    pass


class PermissionDenied(ArchiveBiasError):
    """The site descriptor does not allow scraping."""


class StrategyDataMissing(ArchiveBiasError):
    """A pagination selector or template produced nothing usable."""


class FetchError(ArchiveBiasError):
    def __init__(self, url: str, message: str, status: int | None = None):
        super().__init__(f"{url}: {message}")
        self.url = url
        self.status = status


class ReplayMiss(FetchError):
    """Replay mode was asked for a URL that was never recorded."""


class EncodingUndetectable(ArchiveBiasError):
    pass


class DateUnparseable(ArchiveBiasError):
    pass


class ExtractionEmpty(ArchiveBiasError):
    pass


class UnknownSchool(ArchiveBiasError):
    pass


class StorageError(ArchiveBiasError):
    """Underlying persistence failure (disk full, permissions, ...)."""


class EmptyKeyword(ArchiveBiasError):
    pass


class EmptyText(ArchiveBiasError):
    pass


class EmptySentence(ArchiveBiasError):
    pass


class EmptyList(ArchiveBiasError):
    pass


class OverBudget(ArchiveBiasError):
    def __init__(self, token_count: int, max_tokens: int):
        super().__init__(f"text has {token_count} tokens, budget is {max_tokens}")
        self.token_count = token_count
        self.max_tokens = max_tokens


class SummaryServiceError(ArchiveBiasError):
    pass


class SentimentServiceError(ArchiveBiasError):
    pass


class NoArticles(ArchiveBiasError):
    pass


class MalformedResults(ArchiveBiasError):
    pass
