"""Distributed black-box hyper-parameter tuning for optimization solvers."""

from .benchfn import BenchSpec, eval_bench, make_polyfit
from .orchestrator import (
    Coordinator,
    Experiment,
    StopCriteria,
    create_experiment,
    resume_experiment,
    run_experiment,
    start_experiment,
    stop_experiment,
)
from .searchspace import (
    Categorical,
    Configuration,
    Continuous,
    Genome,
    Integer,
    LogContinuous,
    ParamSpec,
    SearchSpace,
    decode,
    halton_point,
    init_population,
    parse_space,
)
from .targets import TargetSpec, bench_target, evaluate, make_synthetic_solver
from .tuners import AskBatch, TellResult, TunerConfig, create_tuner, minimize

__version__ = "0.1.0"
