from ._core import (
    advantages,
    delta_t,
    derive_seed,
    filter_coldstart,
    generate_scene,
    perturb,
    questions,
    region_masks,
    render,
    run_cli,
)

__all__ = [
    "advantages",
    "delta_t",
    "derive_seed",
    "filter_coldstart",
    "generate_scene",
    "perturb",
    "questions",
    "region_masks",
    "render",
    "run_cli",
]
