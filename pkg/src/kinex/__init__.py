"""Kinetic exchange market simulator with endogenous savings behavior."""

__version__ = "0.1.0"

from .config import RunConfig, load_config, parse_config
from .errors import ConfigError, ConservationError, DomainError, KinexError
from .exchange import Agent, ClearingInput, TradeDraw, cc_trade, ccm_trade, clearing_prices
from .kernels import active_backend, available_backends, get_kernels
from .market import (
    MarketState,
    advance,
    average_lambda,
    imitation_trade_step,
    new_market,
    select_pair,
    step,
)
from .presets import FIGURE_IDS, PresetMember, preset
from .rng import TradeDrawStream, substream
from .runner import (
    EnsembleResult,
    RunManifest,
    SimResult,
    manifest_from_json,
    run_ensemble,
    run_model,
    simulate_run,
    write_outputs,
)
from .savings import (
    Constant,
    Imitation,
    MoneyDependent,
    QuenchedUniform,
    StrategyCensus,
    Urn,
    UrnState,
    detect_consensus,
    money_dependent_lambda,
    optimal_split,
    urn_limit,
    urn_limit_ensemble,
    urn_step,
)
from .stats import (
    DensityEstimate,
    TailFit,
    average_densities,
    beta_cdf,
    beta_pdf,
    count_modes,
    estimate_tail_exponent,
    gamma_moment_fit,
    histogram,
    ks_statistic,
    ks_two_sample,
    linear_edges,
    log_edges,
    stationarity_check,
)
