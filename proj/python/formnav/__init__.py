"""Graph-based web navigation and form test generation."""

from ._formnav import (
    compute_metrics,
    crawl,
    explore_form,
    generate_benchmark,
    generate_scenario,
    judge_offline,
    plan_scripts,
    run_pipeline,
    run_scripts,
    save_single_form_bundle,
    scenario_markdown,
)

__all__ = [
    "compute_metrics",
    "crawl",
    "explore_form",
    "generate_benchmark",
    "generate_scenario",
    "judge_offline",
    "plan_scripts",
    "run_pipeline",
    "run_scripts",
    "save_single_form_bundle",
    "scenario_markdown",
]
