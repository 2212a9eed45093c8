"""Scenario configuration from TOML files.

Layout (all sections optional except that a master seed must come from
the file or the command line)::

    system = "kljn"            # or "thermod"
    master_seed = 1
    n_bits = 256
    trials = 10000
    pa_iterations = 4
    ber_samples = [10, 30, 100, 300, 1000]

    [pair]       r_low, r_high
    [noise]      effective_temperature, bandwidth, sampling_rate, samples_per_bit, normalized
    [amplifier]  gain, added_noise_variance, artifact_gain_ripple, power_draw
    [channel]    gain_to_receiver, gain_to_eavesdropper, environment_noise_variance,
                 delay_taps = [[delay, amplitude], ...]
    [power]      amp_watts, proc_watts, antenna_watts, bit_period
    [[power.components]]  name, watts

Unknown keys anywhere are errors.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from kljnlab.kljn import ResistorPair
from kljnlab.noise import NoiseSpec
from kljnlab.power import ComponentPower, PowerBudget, default_budget
from kljnlab.thermod import AmplifierModel, ChannelModel

DEFAULT_SEED = 20250101


class ConfigError(ValueError):
    def __init__(self, field_path: str, message: str):
        self.field = field_path
        super().__init__(f"{field_path}: {message}")


@dataclass(frozen=True)
class ScenarioConfig:
    master_seed: int
    system: str = "kljn"
    pair: ResistorPair = field(default_factory=ResistorPair)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    amplifier: AmplifierModel = field(default_factory=lambda: AmplifierModel(power_draw=1.0))
    channel: ChannelModel = field(default_factory=ChannelModel)
    n_bits: int = 256
    trials: int = 10_000
    pa_iterations: int = 4
    ber_samples: tuple[int, ...] = (10, 30, 100, 300, 1000)
    power: PowerBudget = field(default_factory=default_budget)

    def __post_init__(self):
        if self.system not in ("kljn", "thermod"):
            raise ConfigError("system", f"must be 'kljn' or 'thermod', got {self.system!r}")
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigError("master_seed", "must be a non-negative integer")
        for name in ("n_bits", "trials", "pa_iterations"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(name, f"must be an integer, got {value!r}")
        for name in ("n_bits", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be >= 1")
        if self.pa_iterations < 0:
            raise ConfigError("pa_iterations", "must be >= 0")
        if not self.ber_samples or any(n < 1 for n in self.ber_samples):
            raise ConfigError("ber_samples", "must be a non-empty list of positive integers")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _section(cls, data: Any, path: str, **extra):
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a table")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "unknown key")
    try:
        return cls(**{**data, **extra})
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def config_from_dict(data: dict, seed: Optional[int] = None) -> ScenarioConfig:
    data = dict(data)
    top = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if seed is not None:
        data["master_seed"] = seed
    if "master_seed" not in data:
        raise ConfigError("master_seed", "required (in the file or via --seed)")

    kwargs: dict[str, Any] = {}
    for key in ("system", "master_seed", "n_bits", "trials", "pa_iterations"):
        if key in data:
            kwargs[key] = data[key]
    if "ber_samples" in data:
        kwargs["ber_samples"] = tuple(data["ber_samples"])
    if "pair" in data:
        kwargs["pair"] = _section(ResistorPair, data["pair"], "pair")
    if "noise" in data:
        kwargs["noise"] = _section(NoiseSpec, data["noise"], "noise")
    if "amplifier" in data:
        kwargs["amplifier"] = _section(AmplifierModel, data["amplifier"], "amplifier")
    if "channel" in data:
        ch = dict(data["channel"]) if isinstance(data["channel"], dict) else data["channel"]
        if isinstance(ch, dict) and "delay_taps" in ch:
            taps = ch["delay_taps"]
            if not all(isinstance(t, (list, tuple)) and len(t) == 2 for t in taps):
                raise ConfigError("channel.delay_taps", "each tap must be [delay, amplitude]")
            ch["delay_taps"] = tuple(tuple(t) for t in taps)
        kwargs["channel"] = _section(ChannelModel, ch, "channel")

    noise = kwargs.get("noise", NoiseSpec())
    amp = kwargs.get("amplifier", AmplifierModel(power_draw=1.0))
    power = data.get("power", {})
    if not isinstance(power, dict):
        raise ConfigError("power", "expected a table")
    power = dict(power)
    if "components" in power:
        comps = []
        for i, c in enumerate(power["components"]):
            comps.append(_section(ComponentPower, c, f"power.components[{i}]"))
        power["kljn_components"] = tuple(comps)
        del power["components"]
    elif "kljn_components" in power:
        raise ConfigError("power.kljn_components", "unknown key (use [[power.components]])")
    else:
        power["kljn_components"] = default_budget().kljn_components
    power.setdefault("amp_watts", amp.power_draw)
    power.setdefault("proc_watts", default_budget().proc_watts)
    power.setdefault("bit_period", noise.bit_period)
    kwargs["power"] = _section(PowerBudget, power, "power")

    try:
        return ScenarioConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("<root>", str(exc)) from None


def load_config(path: Optional[str | Path], seed: Optional[int] = None) -> ScenarioConfig:
    """Read a scenario file; with ``path=None`` the built-in defaults are used."""
    if path is None:
        return config_from_dict({}, seed if seed is not None else DEFAULT_SEED)
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(path), f"invalid TOML: {exc}") from None
    return config_from_dict(data, seed)
