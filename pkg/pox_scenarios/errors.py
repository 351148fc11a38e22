"""
Exceptions raised while building ER programs and running scenarios.

A rejected proof or a lost game is not an exception: it is a verdict.
"""


class ScenarioError(Exception):
    """Base class for scenario errors."""


class BuildError(ScenarioError):
    """An ER program cannot be laid out with a single entry and a single exit."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class UnknownStrategy(ScenarioError, KeyError):
    """No adversary strategy is registered under the given name."""

    def __init__(self, name: str, known=()):
        self.name = name
        hint = f" (known: {', '.join(sorted(known))})" if known else ""
        super().__init__(f"unknown strategy: {name}{hint}")

    def __str__(self) -> str:
        return self.args[0]
