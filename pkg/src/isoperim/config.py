"""Run configuration: a strict, JSON-backed description of a CLI run.

The file format is plain JSON.  Parsing is strict in both directions:
unknown keys are rejected at every nesting level with a diagnostic that
names the key, and ``from_dict(to_dict(cfg)) == cfg`` exactly, so a
config survives a parse/serialize/parse cycle unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .corpus import FAMILIES
from .exprs import ExpressionError, parse_expression
from .measure import space_from_dict
from .norms import parse_norm
from .profiles import profile_from_dict

__all__ = ["ConfigError", "RunConfig", "SpaceJob", "CorpusSpec",
           "FunctionSpec", "TransferSpec", "INEQUALITY_IDS"]

INEQUALITY_IDS = (
    "oscillation",
    "coulhon-pointwise",
    "coulhon",
    "mazya-talenti",
    "polya-szego",
    "bobkov-houdre",
    "truncation",
    "self-improvement",
    "poincare-identity",
    "poincare-chain",
    "oscillation-modulus",
    "garsia",
    "morrey-holder",
    "higher-order",
    "transference",
)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _reject_unknown(d: dict, context: str) -> None:
    if d:
        keys = ", ".join(sorted(map(str, d)))
        raise ConfigError(f"unknown key(s) in {context}: {keys}")


def _pop(d: dict, key: str, default):
    return d.pop(key) if key in d else default


def _validated_space(d, context: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{context} must be a space descriptor object")
    try:
        space_from_dict(d)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad space in {context}: {exc}") from exc
    return dict(d)


def _validated_profile(d, context: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{context} must be a profile descriptor object")
    try:
        profile_from_dict(d)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad profile in {context}: {exc}") from exc
    return dict(d)


@dataclass(frozen=True)
class SpaceJob:
    """One space to run on, with an optional explicit profile.

    Without a profile the runner picks the space's natural one: the
    Gaussian profile on the Gaussian line, the constant unit profile on
    the unit interval, the cube lower bound in higher dimension, and the
    Euclidean profile on boxes.
    """

    space: dict
    profile: dict | None = None

    @classmethod
    def from_dict(cls, d, index: int) -> "SpaceJob":
        ctx = f"spaces[{index}]"
        if not isinstance(d, dict):
            raise ConfigError(f"{ctx} must be an object")
        d = dict(d)
        space = _validated_space(_pop(d, "space", None), ctx)
        profile = _pop(d, "profile", None)
        if profile is not None:
            profile = _validated_profile(profile, ctx)
        _reject_unknown(d, ctx)
        return cls(space=space, profile=profile)

    def to_dict(self) -> dict:
        return {"space": dict(self.space),
                "profile": None if self.profile is None
                else dict(self.profile)}


@dataclass(frozen=True)
class CorpusSpec:
    """Which members of the fixed test corpus to use."""

    seed: int = 0
    families: tuple | None = None
    count: int | None = None
    inject_discontinuity: bool = False

    @classmethod
    def from_dict(cls, d) -> "CorpusSpec":
        if not isinstance(d, dict):
            raise ConfigError("corpus must be an object")
        d = dict(d)
        seed = int(_pop(d, "seed", 0))
        families = _pop(d, "families", None)
        if families is not None:
            families = tuple(families)
            for fam in families:
                if fam not in FAMILIES:
                    raise ConfigError(f"unknown corpus family {fam!r}")
        count = _pop(d, "count", None)
        if count is not None:
            count = int(count)
            if count < 0:
                raise ConfigError("corpus count must be nonnegative")
        inject = bool(_pop(d, "inject_discontinuity", False))
        _reject_unknown(d, "corpus")
        return cls(seed=seed, families=families, count=count,
                   inject_discontinuity=inject)

    def to_dict(self) -> dict:
        return {"seed": self.seed,
                "families": None if self.families is None
                else list(self.families),
                "count": self.count,
                "inject_discontinuity": self.inject_discontinuity}


@dataclass(frozen=True)
class FunctionSpec:
    """A single named function given as a coordinate expression."""

    expr: str
    space: dict
    name: str = "f"

    @classmethod
    def from_dict(cls, d) -> "FunctionSpec":
        if not isinstance(d, dict):
            raise ConfigError("function must be an object")
        d = dict(d)
        expr = _pop(d, "expr", None)
        if not isinstance(expr, str):
            raise ConfigError("function.expr must be a string")
        try:
            parse_expression(expr)
        except ExpressionError as exc:
            raise ConfigError(f"bad function.expr: {exc}") from exc
        space = _validated_space(_pop(d, "space", None), "function")
        name = str(_pop(d, "name", "f"))
        _reject_unknown(d, "function")
        return cls(expr=expr, space=space, name=name)

    def to_dict(self) -> dict:
        return {"expr": self.expr, "space": dict(self.space),
                "name": self.name}


@dataclass(frozen=True)
class TransferSpec:
    """Dimension range and profile list for the transference table."""

    n_lo: int = 1
    n_hi: int = 20
    profiles: tuple = ()

    @classmethod
    def from_dict(cls, d) -> "TransferSpec":
        if not isinstance(d, dict):
            raise ConfigError("transfer must be an object")
        d = dict(d)
        n_lo = int(_pop(d, "n_lo", 1))
        n_hi = int(_pop(d, "n_hi", 20))
        profiles = tuple(
            _validated_profile(p, f"transfer.profiles[{i}]")
            for i, p in enumerate(_pop(d, "profiles", ())))
        _reject_unknown(d, "transfer")
        return cls(n_lo=n_lo, n_hi=n_hi, profiles=profiles)

    def to_dict(self) -> dict:
        return {"n_lo": self.n_lo, "n_hi": self.n_hi,
                "profiles": [dict(p) for p in self.profiles]}


_TOLERANCE_KEYS = {"identity": 1e-6, "blowup_factor": 0.5}
_PARAM_KEYS = {"coulhon_p": 2.0, "modulus_p": 2.0, "morrey_p": None,
               "higher_order_k": 2, "transference_p": 1.0,
               "truncation_t": 0.25}


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs, validated eagerly."""

    out: str = "out"
    seed: int = 0
    t_min: float | None = None
    grid: int = 48
    inequalities: object = "all"
    norms: tuple = ("Lp:1", "Lp:2")
    spaces: tuple = ()
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    function: FunctionSpec | None = None
    transfer: TransferSpec | None = None
    tolerances: tuple = tuple(sorted(_TOLERANCE_KEYS.items()))
    params: tuple = tuple(sorted(_PARAM_KEYS.items()))

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        d = dict(d)
        out = str(_pop(d, "out", "out"))
        seed = int(_pop(d, "seed", 0))
        t_min = _pop(d, "t_min", None)
        if t_min is not None:
            t_min = float(t_min)
            if not t_min > 0:
                raise ConfigError("t_min must be positive")
        grid = int(_pop(d, "grid", 48))
        if grid < 2:
            raise ConfigError("grid must have at least 2 points")
        ineqs = _pop(d, "inequalities", "all")
        if ineqs != "all":
            ineqs = tuple(ineqs)
            for name in ineqs:
                if name not in INEQUALITY_IDS:
                    raise ConfigError(f"unknown inequality id {name!r}")
        norms = tuple(str(s) for s in _pop(d, "norms", ("Lp:1", "Lp:2")))
        for text in norms:
            try:
                parse_norm(text)
            except ValueError as exc:
                raise ConfigError(f"bad norm {text!r}: {exc}") from exc
        spaces = tuple(SpaceJob.from_dict(s, i)
                       for i, s in enumerate(_pop(d, "spaces", ())))
        corpus = CorpusSpec.from_dict(_pop(d, "corpus", {}))
        function = _pop(d, "function", None)
        if function is not None:
            function = FunctionSpec.from_dict(function)
        transfer = _pop(d, "transfer", None)
        if transfer is not None:
            transfer = TransferSpec.from_dict(transfer)
        tolerances = cls._table(_pop(d, "tolerances", {}), _TOLERANCE_KEYS,
                                "tolerances")
        params = cls._table(_pop(d, "params", {}), _PARAM_KEYS, "params")
        _reject_unknown(d, "config")
        return cls(out=out, seed=seed, t_min=t_min, grid=grid,
                   inequalities=ineqs, norms=norms, spaces=spaces,
                   corpus=corpus, function=function, transfer=transfer,
                   tolerances=tolerances, params=params)

    @staticmethod
    def _table(d, defaults: dict, context: str) -> tuple:
        if not isinstance(d, dict):
            raise ConfigError(f"{context} must be an object")
        d = dict(d)
        out = {}
        for key, default in defaults.items():
            val = _pop(d, key, default)
            if val is not None and key != "higher_order_k":
                val = float(val)
            if key == "higher_order_k":
                val = int(val)
            out[key] = val
        _reject_unknown(d, context)
        return tuple(sorted(out.items()))

    # -- convenient read access ------------------------------------------

    def tolerance(self, key: str):
        return dict(self.tolerances)[key]

    def param(self, key: str):
        return dict(self.params)[key]

    def selected(self) -> tuple:
        if self.inequalities == "all":
            return INEQUALITY_IDS
        return tuple(self.inequalities)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "out": self.out,
            "seed": self.seed,
            "t_min": self.t_min,
            "grid": self.grid,
            "inequalities": "all" if self.inequalities == "all"
            else list(self.inequalities),
            "norms": list(self.norms),
            "spaces": [s.to_dict() for s in self.spaces],
            "corpus": self.corpus.to_dict(),
            "function": None if self.function is None
            else self.function.to_dict(),
            "transfer": None if self.transfer is None
            else self.transfer.to_dict(),
            "tolerances": dict(self.tolerances),
            "params": dict(self.params),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
