"""Power and energy accounting for KLJN and TherMod terminals."""

from __future__ import annotations

from dataclasses import dataclass, field


class NoSecureBitsError(ValueError):
    """A secure fraction of zero means no final key bit can ever be produced."""


@dataclass(frozen=True)
class ComponentPower:
    name: str
    watts: float

    def __post_init__(self):
        if self.watts < 0:
            raise ValueError(f"component {self.name!r} has negative power {self.watts}")


@dataclass(frozen=True)
class PowerBudget:
    kljn_components: tuple[ComponentPower, ...] = field(default_factory=tuple)
    amp_watts: float = 0.0
    proc_watts: float = 0.0
    antenna_watts: float = 0.0
    bit_period: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kljn_components", tuple(self.kljn_components))
        for name in ("amp_watts", "proc_watts", "antenna_watts"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.bit_period > 0:
            raise ValueError("bit_period must be > 0")


def default_budget(bit_period: float = 5.0) -> PowerBudget:
    """Illustrative wattages for demos; not measured data."""
    return PowerBudget(
        kljn_components=(
            ComponentPower("rng", 0.1),
            ComponentPower("switch", 0.02),
            ComponentPower("measurement", 0.3),
            ComponentPower("statistics", 0.08),
        ),
        amp_watts=1.0,
        proc_watts=0.4,
        antenna_watts=0.0,
        bit_period=bit_period,
    )


def p_kljn(budget: PowerBudget) -> float:
    return sum(c.watts for c in budget.kljn_components)


def p_thermod(budget: PowerBudget) -> float:
    return p_kljn(budget) + budget.amp_watts + budget.proc_watts + budget.antenna_watts


def system_power(budget: PowerBudget, system: str) -> float:
    if system == "kljn":
        return p_kljn(budget)
    if system == "thermod":
        return p_thermod(budget)
    raise ValueError(f"system must be 'kljn' or 'thermod', got {system!r}")


@dataclass(frozen=True)
class EnergyReport:
    joules: float
    cycle_multiplier: float
    watts: float


def cycle_multiplier(k: int, secure_fraction: float) -> float:
    """Raw bit periods spent per final key bit."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if secure_fraction == 0:
        raise NoSecureBitsError("secure_fraction is 0: no secure bits can be produced")
    if not 0 < secure_fraction <= 1:
        raise ValueError(f"secure_fraction must be in (0, 1], got {secure_fraction}")
    return 2**k / secure_fraction


def energy_per_final_bit(budget: PowerBudget, k: int, secure_fraction: float, system: str) -> EnergyReport:
    mult = cycle_multiplier(k, secure_fraction)
    watts = system_power(budget, system)
    return EnergyReport(mult * budget.bit_period * watts, mult, watts)
