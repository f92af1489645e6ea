"""System configuration: every tunable symbol of the model, with
validation, file loading and serialization.

Config files are line-oriented sectioned key=value text (INI style) with
sections [source], [channel], [detector], [security], [block], [attack]
and `#` comments.  Omitted keys fall back to the fiber-link defaults
(0.3 dB/km fiber, 5 dB bulk loss, eta=0.5, dark counts 1e-6, 1% channel
errors, 200 Mbit blocks, all security parameters 30).
"""

from __future__ import annotations

import configparser
import enum
import hashlib
import math
import warnings
from dataclasses import dataclass, field, fields, replace

__all__ = [
    "SourceKind",
    "Scenario",
    "SourceSpec",
    "ChannelSpec",
    "DetectorSpec",
    "SecurityParams",
    "BlockSpec",
    "AttackSpec",
    "SystemConfig",
    "ValidationReport",
    "ConstraintCheck",
    "ConfigError",
    "load_config",
    "loads_config",
    "serialize",
    "validate",
    "Y_BOUND_ELIMINATED",
    "Y_BOUND_INTACT",
]

# y-constraint bounds for the two multi-photon compression regimes
Y_BOUND_ELIMINATED = 1.0 - 1.0 / math.sqrt(2.0)   # y = eta must exceed this
Y_BOUND_INTACT = 1.0 - 2.0 ** (-1.0 / 3.0)        # y = eta*alpha must stay below


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


class SourceKind(enum.Enum):
    WEAK_COHERENT = "weak_coherent"
    SINGLE_PHOTON = "single_photon"


class Scenario(enum.Enum):
    """Eavesdropper capability with respect to the line attenuation."""

    ATTENUATION_INTACT = "attenuation_intact"
    ATTENUATION_ELIMINATED = "attenuation_eliminated"


def _require(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{name}: {msg}")


@dataclass(frozen=True)
class SourceSpec:
    kind: SourceKind = SourceKind.WEAK_COHERENT
    mu: float = 0.1                  # mean photons per pulse (WCS only)
    pulse_period_tau: float = 1e-6   # seconds per pulse (1 MHz default)

    def __post_init__(self):
        _require(self.mu >= 0, "mu", "must be >= 0")
        if self.kind is SourceKind.WEAK_COHERENT:
            _require(self.mu > 0, "mu", "must be > 0 for a weak coherent source")
        _require(self.pulse_period_tau > 0, "pulse_period_tau", "must be > 0")


@dataclass(frozen=True)
class ChannelSpec:
    attenuation_A: float = 0.3       # dB/km
    bulk_loss_kappa: float = 5.0     # dB, stored as a loss magnitude
    fiber_length_km: float = 10.0
    intrinsic_error_rc: float = 0.01

    def __post_init__(self):
        _require(self.attenuation_A >= 0, "attenuation_A", "must be >= 0")
        _require(self.bulk_loss_kappa >= 0, "bulk_loss_kappa", "must be >= 0")
        _require(self.fiber_length_km >= 0, "fiber_length_km", "must be >= 0")
        _require(0 <= self.intrinsic_error_rc <= 1, "intrinsic_error_rc",
                 "must be in [0,1]")


@dataclass(frozen=True)
class DetectorSpec:
    efficiency_eta: float = 0.5
    dark_count_rd: float = 1e-6      # per pulse period

    def __post_init__(self):
        _require(0 < self.efficiency_eta <= 1, "efficiency_eta",
                 "must be in (0,1]")
        _require(0 <= self.dark_count_rd < 1, "dark_count_rd",
                 "must be in [0,1)")
        if self.dark_count_rd > 1e-3:
            warnings.warn(
                "dark_count_rd > 1e-3 strains the r_d << 1 approximation "
                "in the sifted-length formulas", UserWarning)


@dataclass(frozen=True)
class SecurityParams:
    g_auth: int = 30
    g_EC: int = 30
    g_pa: int = 30
    epsilon: float = 1e-9
    shannon_deficit_x: float = 1.16
    rho: float = 0.5                 # expected errors per EC block
    n2_required: int = 30            # consecutive clean validation passes

    def __post_init__(self):
        for name in ("g_auth", "g_EC", "g_pa", "n2_required"):
            v = getattr(self, name)
            _require(isinstance(v, int) and v > 0, name,
                     "must be a positive integer")
        _require(0 < self.epsilon < 1, "epsilon", "must be in (0,1)")
        _require(self.shannon_deficit_x >= 1, "shannon_deficit_x",
                 "must be >= 1 (cannot beat the Shannon limit)")
        _require(self.rho > 0, "rho", "must be > 0")


@dataclass(frozen=True)
class BlockSpec:
    raw_block_m: int = 200_000_000
    machine_word_w: int = 64
    overhead_LB0: int = 1_000_000

    def __post_init__(self):
        _require(self.raw_block_m >= 2 ** 10, "raw_block_m",
                 "must be >= 2^10")
        _require(self.machine_word_w in (8, 16, 32, 64, 128),
                 "machine_word_w", "must be one of 8,16,32,64,128")
        _require(self.overhead_LB0 >= 0, "overhead_LB0", "must be >= 0")


@dataclass(frozen=True)
class AttackSpec:
    scenario: Scenario = Scenario.ATTENUATION_INTACT
    eve_intercept_fraction_phi: float = 0.0

    def __post_init__(self):
        _require(0 <= self.eve_intercept_fraction_phi <= 1,
                 "eve_intercept_fraction_phi", "must be in [0,1]")


@dataclass(frozen=True)
class SystemConfig:
    source: SourceSpec = field(default_factory=SourceSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    detector: DetectorSpec = field(default_factory=DetectorSpec)
    security: SecurityParams = field(default_factory=SecurityParams)
    block: BlockSpec = field(default_factory=BlockSpec)
    attack: AttackSpec = field(default_factory=AttackSpec)

    def with_fiber_length(self, km: float) -> "SystemConfig":
        return replace(self, channel=replace(self.channel, fiber_length_km=km))

    def with_mu(self, mu: float) -> "SystemConfig":
        return replace(self, source=replace(self.source, mu=mu))

    def digest(self) -> str:
        """Short stable identifier of the full parameter set."""
        return hashlib.sha256(serialize(self).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class ConstraintCheck:
    scenario: Scenario
    y: float
    bound: float
    satisfied: bool


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    constraints: tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def constraint_for(self, scenario: Scenario) -> ConstraintCheck:
        for c in self.constraints:
            if c.scenario is scenario:
                return c
        raise KeyError(scenario)


def validate(config: SystemConfig) -> ValidationReport:
    """Range checks plus the per-scenario y-constraints of the
    multi-photon compression formulas.  Pure: never raises."""
    from .photonics import transmission_probability

    violations = []
    for section_name in ("source", "channel", "detector", "security",
                         "block", "attack"):
        section = getattr(config, section_name)
        try:
            type(section)(**{f.name: getattr(section, f.name)
                             for f in fields(section)})
        except ConfigError as exc:
            violations.append(str(exc))

    alpha = transmission_probability(config.channel)
    eta = config.detector.efficiency_eta
    checks = (
        ConstraintCheck(Scenario.ATTENUATION_ELIMINATED, eta,
                        Y_BOUND_ELIMINATED, eta > Y_BOUND_ELIMINATED),
        ConstraintCheck(Scenario.ATTENUATION_INTACT, eta * alpha,
                        Y_BOUND_INTACT, eta * alpha < Y_BOUND_INTACT),
    )
    return ValidationReport(tuple(violations), checks)


# ---------------------------------------------------------------------------
# file format

_SECTIONS = {
    "source": SourceSpec,
    "channel": ChannelSpec,
    "detector": DetectorSpec,
    "security": SecurityParams,
    "block": BlockSpec,
    "attack": AttackSpec,
}

_SOURCE_KINDS = {
    "weakcoherent": SourceKind.WEAK_COHERENT,
    "weak_coherent": SourceKind.WEAK_COHERENT,
    "wcs": SourceKind.WEAK_COHERENT,
    "singlephoton": SourceKind.SINGLE_PHOTON,
    "single_photon": SourceKind.SINGLE_PHOTON,
    "sps": SourceKind.SINGLE_PHOTON,
}

_SCENARIOS = {
    "attenuationintact": Scenario.ATTENUATION_INTACT,
    "attenuation_intact": Scenario.ATTENUATION_INTACT,
    "intact": Scenario.ATTENUATION_INTACT,
    "attenuationeliminated": Scenario.ATTENUATION_ELIMINATED,
    "attenuation_eliminated": Scenario.ATTENUATION_ELIMINATED,
    "eliminated": Scenario.ATTENUATION_ELIMINATED,
}


def _parse_value(name: str, ftype: type, raw: str):
    raw = raw.strip()
    if ftype is SourceKind:
        try:
            return _SOURCE_KINDS[raw.replace("-", "_").lower()]
        except KeyError:
            raise ConfigError(f"{name}: unknown source kind {raw!r}") from None
    if ftype is Scenario:
        try:
            return _SCENARIOS[raw.replace("-", "_").lower()]
        except KeyError:
            raise ConfigError(f"{name}: unknown scenario {raw!r}") from None
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as a number") from None
    if ftype is int:
        if value != int(value):
            raise ConfigError(f"{name}: {raw!r} is not an integer")
        return int(value)
    return value


def loads_config(text: str) -> SystemConfig:
    """Parse a config from a string; see load_config."""
    parser = configparser.ConfigParser(comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str    # field names are case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc

    kwargs = {}
    for sect_name, cls in _SECTIONS.items():
        known = {f.name: f for f in fields(cls)}
        values = {}
        if parser.has_section(sect_name):
            for key, raw in parser.items(sect_name):
                if key not in known:
                    raise ConfigError(
                        f"unknown key {key!r} in section [{sect_name}]")
                ftype = known[key].type
                if isinstance(ftype, str):  # from __future__ annotations
                    ftype = {"float": float, "int": int,
                             "SourceKind": SourceKind,
                             "Scenario": Scenario}[ftype]
                values[key] = _parse_value(key, ftype, raw)
        kwargs[sect_name] = cls(**values)
    for sect in parser.sections():
        if sect not in _SECTIONS:
            raise ConfigError(f"unknown section [{sect}]")
    return SystemConfig(**kwargs)


def load_config(path) -> SystemConfig:
    """Load and validate a SystemConfig from a sectioned key=value file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return loads_config(text)


def _format_value(value) -> str:
    if isinstance(value, SourceKind):
        return "weak_coherent" if value is SourceKind.WEAK_COHERENT else "single_photon"
    if isinstance(value, Scenario):
        return "intact" if value is Scenario.ATTENUATION_INTACT else "eliminated"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def serialize(config: SystemConfig) -> str:
    """Render a config in the file format; round-trips through
    loads_config to an equal SystemConfig."""
    lines = []
    for sect_name in _SECTIONS:
        section = getattr(config, sect_name)
        lines.append(f"[{sect_name}]")
        for f in fields(section):
            lines.append(f"{f.name} = {_format_value(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)
