"""Exception types shared across the package."""


class InputError(Exception):
    """Invalid user-supplied input: corpus/question/lexicon/weight/config files or CLI values."""


class PersistenceError(InputError):
    """A persisted artifact (index or topic-model file) is corrupt, truncated, or incompatible."""
