import copy
import logging
from dataclasses import dataclass
from pathlib import Path

import yaml

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "config/config.yaml"

DEFAULT_CONFIG = {
    # Imputation
    "imputation": {
        "strategy": "intra-inter-intra",  # "intra", "inter" or "intra-inter-intra"
        "policy": "first",  # "first" or "majority"
        "case_insensitive": False,
        "passes": 1,
        "jobs": 1,  # dimensions processed concurrently in intra passes
    },

    # Attribute matching across dimensions
    "matching": {
        "threshold": 0.8,
        "strip_tokens": [],
        "case_fold": True,
        "aliases": None,  # path to an alias map JSON file
    },

    # CSV ingestion
    "tables": {
        "null_tokens": [""],
    },

    # Evaluation protocol
    "evaluation": {
        "rates": [1, 5, 10, 20, 30, 40, 50],  # percent
        "trials": 20,
        "seed": 0,
        "jobs": 1,  # keep 1 for clean runtime curves
        "timing": True,
        "count_preexisting": False,
    },

    "output": {
        "directory": "out",
        "fill_log_format": "csv",  # "csv" or "json"
        "events": False,
    },

    "logging": {
        "level": "INFO",
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one CLI invocation."""
    schema: str
    strategy: str
    policy: str
    case_insensitive: bool
    threshold: float
    strip_tokens: tuple
    case_fold: bool
    aliases: object
    null_tokens: tuple
    passes: int
    jobs: int
    seed: int
    output_directory: str
    fill_log_format: str
    events: bool


def generate_default_config(output_path=DEFAULT_CONFIG_PATH):
    """
    Write the default run configuration as YAML.
    """
    config = copy.deepcopy(DEFAULT_CONFIG)

    config_dir = Path(output_path).parent
    config_dir.mkdir(parents=True, exist_ok=True)

    with open(output_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config, f, default_flow_style=False, sort_keys=False)

    print(f"✅ Generated config file: {output_path}")
    return config


def deep_update(d, u):
    """Recursively merge mapping u into d (d is modified and returned)."""
    for k, v in u.items():
        if isinstance(v, dict) and isinstance(d.get(k), dict):
            d[k] = deep_update(d[k], v)
        else:
            d[k] = v
    return d


def merge_config(defaults, overrides):
    return deep_update(copy.deepcopy(defaults), overrides or {})


def load_config(config_path=DEFAULT_CONFIG_PATH):
    """
    Load the run configuration, layered over the defaults.

    A missing file is not an error: the defaults are used.
    """
    path = Path(config_path)
    if not path.exists():
        logger.warning("config file not found: %s, using defaults", config_path)
        return copy.deepcopy(DEFAULT_CONFIG)

    with open(path, "r", encoding="utf-8") as f:
        loaded = yaml.safe_load(f) or {}
    if not isinstance(loaded, dict):
        raise ValueError(f"{config_path}: top level must be a mapping")

    unknown = sorted(set(loaded) - set(DEFAULT_CONFIG))
    if unknown:
        raise ValueError(f"{config_path}: unknown section(s) {unknown}")
    return merge_config(DEFAULT_CONFIG, loaded)


def build_run_config(args, config):
    """
    Resolve settings: command-line flags override the config file,
    which overrides the defaults.

    Args:
        args: argparse Namespace (unset flags are None)
        config: Mapping returned by load_config
    """
    def pick(flag, section, key):
        value = getattr(args, flag, None)
        return config[section][key] if value is None else value

    null_tokens = list(config["tables"]["null_tokens"])
    for token in getattr(args, "null_token", None) or ():
        if token not in null_tokens:
            null_tokens.append(token)
    if "" not in null_tokens:
        null_tokens.insert(0, "")
    passes = int(pick("passes", "imputation", "passes"))
    if passes < 1:
        raise ValueError(f"passes must be >= 1, got {passes}")

    return RunConfig(
        schema=str(getattr(args, "schema", "") or ""),
        strategy=pick("strategy", "imputation", "strategy"),
        policy=pick("policy", "imputation", "policy"),
        case_insensitive=bool(pick("case_insensitive", "imputation", "case_insensitive")),
        threshold=float(pick("threshold", "matching", "threshold")),
        strip_tokens=tuple(config["matching"]["strip_tokens"] or ()),
        case_fold=bool(config["matching"]["case_fold"]),
        aliases=pick("aliases", "matching", "aliases"),
        null_tokens=tuple(null_tokens),
        passes=passes,
        jobs=int(pick("jobs", "imputation", "jobs")),
        seed=int(pick("seed", "evaluation", "seed")),
        output_directory=str(pick("out", "output", "directory")),
        fill_log_format=pick("log_format", "output", "fill_log_format"),
        events=bool(config["output"]["events"]),
    )


if __name__ == "__main__":
    generate_default_config()
    print("\n📝 Default configuration generated!")
    print(f"Edit {DEFAULT_CONFIG_PATH} to customize settings.")
