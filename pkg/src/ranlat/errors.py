from __future__ import annotations


class ConfigError(ValueError):
    """A configuration violates a structural constraint."""


class InfeasibleError(RuntimeError):
    kind = "infeasible"

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.kind}: {msg}" if msg else self.kind


class UnreachableSR(InfeasibleError):
    kind = "unreachable-SR"


class RadioUnderflow(InfeasibleError):
    kind = "radio-underflow"


class NoFeasibleConfiguration(InfeasibleError):
    kind = "no-feasible-configuration"
