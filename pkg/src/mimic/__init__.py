"""mimic: a hash-consed, dependently-typed compiler IR with a plugin system,
filter-driven partial evaluation, and a regex-to-DFA lowering pipeline."""

from .ir import World
from . import errors

__all__ = ["World", "errors"]
