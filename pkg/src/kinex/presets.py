"""Named parameter presets for the reference figures (fig1..fig7).

Each preset expands to one or more run configurations.  Member labels
become output subdirectory names.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .errors import DomainError

__all__ = ["PresetMember", "preset", "FIGURE_IDS"]

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


@dataclass(frozen=True)
class PresetMember:
    label: str
    config: RunConfig
    note: str


def preset(figure_id: str, seed: int = 0, output_dir: str = "out") -> list[PresetMember]:
    """Run configurations of one reference figure."""
    common = dict(n_agents=100, seed=seed, output_dir=output_dir)
    if figure_id == "fig1":
        return [
            PresetMember(
                label=f"lambda={lam:g}",
                config=RunConfig(model="cc", n_trades=1_000_000, lam=lam, **common),
                note="homogeneous market, shared savings propensity",
            )
            for lam in (0.0, 0.2, 0.5, 0.8)
        ]
    if figure_id == "fig2":
        return [
            PresetMember(
                label="quenched-uniform",
                config=RunConfig(model="ccm", n_trades=1_000_000, **common),
                note="heterogeneous market, quenched uniform propensities; heavy tail",
            )
        ]
    if figure_id == "fig3":
        return [
            PresetMember(
                label=f"c2={c2:g}",
                config=RunConfig(
                    model="selforg_decreasing", n_trades=100_000, c1=0.95, c2=c2, **common
                ),
                note="propensity falls with money; larger c2 approaches the exponential law",
            )
            for c2 in (0.1, 0.5, 1.0, 2.0, 4.0)
        ]
    if figure_id == "fig4":
        return [
            PresetMember(
                label=f"a={a:g}_b={b:g}",
                config=RunConfig(
                    model="polya", n_trades=0, a=a, b=b, warmup=10_000, **common
                ),
                note="frozen propensity distribution only; no trading",
            )
            for a, b in ((1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (4.0, 2.0))
        ]
    if figure_id == "fig5":
        return [
            PresetMember(
                label=f"a={a:g}_b={b:g}",
                config=RunConfig(
                    model="polya", n_trades=1_000_000, a=a, b=b, warmup=10_000, **common
                ),
                note="urn-frozen propensities followed by trading; heavy tail",
            )
            for a, b in ((1.0, 1.0), (4.0, 2.0))
        ]
    if figure_id == "fig6":
        members = [
            PresetMember(
                label="a=b=1e6",
                config=RunConfig(
                    model="polya", n_trades=100_000, a=1e6, b=1e6, warmup=1_000, **common
                ),
                note="degenerate urn limit: behaves like the homogeneous market at lambda 0.5",
            ),
            PresetMember(
                label="a=4_b=4",
                config=RunConfig(
                    model="polya", n_trades=100_000, a=4.0, b=4.0, warmup=10_000, **common
                ),
                note="moderate urn weights; gamma-like money distribution",
            ),
        ]
        return members
    if figure_id == "fig7":
        return [
            PresetMember(
                label=f"case={case}",
                config=RunConfig(
                    model="imitation", n_trades=1_000_000, seed=seed + case,
                    n_agents=100, output_dir=output_dir,
                ),
                note="average propensity time series; flattens once one strategy survives",
            )
            for case in (0, 1, 2)
        ]
    raise DomainError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")
