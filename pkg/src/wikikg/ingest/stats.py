from __future__ import annotations

from dataclasses import dataclass, field

from wikikg.errors import TooManyMalformed


@dataclass
class ParseStats:
    """Line accounting for the tolerant (skip-and-count) parsers."""

    source: str = ""
    tolerance: float = 0.01
    lines: int = 0
    malformed: int = 0
    filtered: int = 0
    emitted: int = 0
    examples: list = field(default_factory=list)

    def bad(self, line_no: int, reason: str) -> None:
        self.malformed += 1
        if len(self.examples) < 5:
            self.examples.append(f"line {line_no}: {reason}")

    def check(self) -> None:
        if self.lines and self.malformed > self.tolerance * self.lines:
            raise TooManyMalformed(
                f"{self.source or 'input'}: {self.malformed} of {self.lines} lines malformed "
                f"(tolerance {self.tolerance:.2%}); first: {'; '.join(self.examples)}"
            )

    def as_dict(self, prefix: str) -> dict:
        return {
            f"{prefix}.lines": self.lines,
            f"{prefix}.malformed": self.malformed,
            f"{prefix}.filtered": self.filtered,
            f"{prefix}.emitted": self.emitted,
        }
