from .integrate import (DivergenceError, Trajectory, convergence_time, initial_state,
                        integrate)
from .scenario import (BUILTINS, ConfigError, GainSpec, ScenarioConfig, config_from_dict,
                       load_config, scenario_vi_a, scenario_vi_b, scenario_vi_c,
                       surrogate_topology)
from .signals import LeaderSignal, Signal, Term

__all__ = [
    "BUILTINS", "ConfigError", "DivergenceError", "GainSpec", "LeaderSignal", "ScenarioConfig",
    "Signal", "Term", "Trajectory", "config_from_dict", "convergence_time", "initial_state",
    "integrate", "load_config", "scenario_vi_a", "scenario_vi_b", "scenario_vi_c",
    "surrogate_topology",
]
