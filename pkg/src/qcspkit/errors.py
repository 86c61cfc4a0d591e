"""Exception hierarchy and resource budgets shared by every module."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace


class QcspError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "error"


class ParseError(QcspError):
    code = "parse_error"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SignatureError(QcspError):
    code = "signature_error"


class WrongClass(QcspError):
    """Input is outside the class a construction applies to."""

    code = "wrong_class"


class BudgetExceeded(QcspError):
    """A configured resource limit was hit; the answer is unknown, not negative."""

    code = "budget_exceeded"


class VerificationError(QcspError):
    """A construction failed its own post-check. Always a bug."""

    code = "verification_failed"


BUDGET_ENV = "QCSPKIT_BUDGETS"


@dataclass(frozen=True)
class Budget:
    max_elements: int = 10**6
    max_nodes: int = 10**7
    max_tuples: int = 5 * 10**7

    def with_(self, **kw) -> "Budget":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def check_elements(self, count: int, what: str = "product") -> None:
        if count > self.max_elements:
            raise BudgetExceeded(
                f"{what} needs {count} elements, budget is {self.max_elements}"
            )


def default_budget() -> Budget:
    """Budget from the JSON file named by ``$QCSPKIT_BUDGETS``, else defaults."""
    path = os.environ.get(BUDGET_ENV)
    if not path:
        return Budget()
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Budget().with_(
        max_elements=data.get("elements"),
        max_nodes=data.get("nodes"),
        max_tuples=data.get("tuples"),
    )
