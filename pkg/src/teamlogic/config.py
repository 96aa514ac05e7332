"""Resource guards. Defaults can be overridden through environment variables."""
import os
from dataclasses import dataclass


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    return int(raw)


@dataclass(frozen=True)
class Limits:
    max_props: int = 4          # whole-property enumeration (2^2^n teams)
    type_cap: int = 4096        # enumerate_types
    exact_type_cap: int = 16    # T_k bound for exact bisimulation-quantifier elimination
    max_successors: int = 16    # |R(X)| in the direct modal evaluator
    max_worlds: int = 16        # worlds in vectorised team evaluation / bounded entailment
    max_grid_models: int = 250_000

    @classmethod
    def from_env(cls):
        return cls(
            max_props=_env_int("TL_MAX_PROPS", cls.max_props),
            type_cap=_env_int("TL_TYPE_CAP", cls.type_cap),
            exact_type_cap=_env_int("TL_EXACT_TYPE_CAP", cls.exact_type_cap),
            max_successors=_env_int("TL_MAX_SUCCESSORS", cls.max_successors),
            max_worlds=_env_int("TL_MAX_WORLDS", cls.max_worlds),
            max_grid_models=_env_int("TL_MAX_GRID", cls.max_grid_models),
        )


def limits():
    return Limits.from_env()
