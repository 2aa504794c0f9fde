"""Run configuration files (YAML; JSON works too).

Example::

    corpus_dir: corpus
    exemplar_ids: [doc_001, doc_002, doc_003]
    output_dir: runs/gpt-4
    mode: replay            # live | record | replay
    cassette: cassettes/gpt-4.jsonl
    model:
      name: gpt-4
      base_url: https://api.openai.com/v1
      api_key_env: OPENAI_API_KEY
      temperature: 0
    retry: {max_attempts: 5, base_delay: 1.0, max_delay: 30.0, jitter: 0.5}
    budget: {max_tokens: 8192, chars_per_token: 4, safety_margin: 0.1}
    ceaf_phi: phi3
    aggregation: micro
    unparseable: singletons
    concurrency: 4

Relative paths are resolved against the directory of the config file.
"""

from __future__ import annotations

from dataclasses import asdict, replace
from pathlib import Path
from typing import Any

import yaml

from .core import ConfigError
from .harness.client import ModelConfig, RetryPolicy
from .harness.prompt import TokenBudget
from .harness.runner import RunConfig
from .metrics import SimilarityKind

_TOP_KEYS = {
    "corpus_dir", "exemplar_ids", "output_dir", "mode", "cassette", "model", "retry",
    "budget", "ceaf_phi", "aggregation", "unparseable", "concurrency",
}
_MODEL_KEYS = {"name", "base_url", "api_key_env", "temperature", "max_tokens", "timeout"}


def _section(d: dict, key: str, allowed: set[str]) -> dict:
    sec = d.get(key) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be a mapping")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{key}': {sorted(unknown)}")
    return sec


def _path(value: Any, base: Path) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def config_from_dict(d: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    m = _section(d, "model", _MODEL_KEYS)
    r = _section(d, "retry", set(RetryPolicy.__dataclass_fields__))
    b = _section(d, "budget", set(TokenBudget.__dataclass_fields__))
    try:
        retry = RetryPolicy(**r)
        model = ModelConfig(
            model=m.get("name", "gpt-4"),
            base_url=m.get("base_url", ModelConfig.base_url),
            api_key_env=m.get("api_key_env", ModelConfig.api_key_env),
            temperature=float(m.get("temperature", 0.0)),
            max_tokens=m.get("max_tokens"),
            timeout=float(m.get("timeout", ModelConfig.timeout)),
            mode=d.get("mode", "live"),
            cassette=_path(d.get("cassette"), base_dir),
            retry=retry,
        )
        budget = TokenBudget(**{"max_tokens": 8192, **b})
        phi = SimilarityKind(d.get("ceaf_phi", "phi3"))
        exemplar_ids = d.get("exemplar_ids") or []
        if not isinstance(exemplar_ids, list):
            raise ConfigError("exemplar_ids must be a list")
        return RunConfig(
            model=model,
            exemplar_ids=tuple(str(x) for x in exemplar_ids),
            budget=budget,
            phi=phi,
            aggregation=d.get("aggregation", "micro"),
            unparseable=d.get("unparseable", "singletons"),
            concurrency=int(d.get("concurrency", 4)),
            corpus_dir=_path(d.get("corpus_dir"), base_dir),
            output_dir=_path(d.get("output_dir"), base_dir),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return config_from_dict(data, path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def apply_overrides(cfg: RunConfig, **overrides: Any) -> RunConfig:
    """Replace settings given on the command line; ``None`` means keep."""
    model_kw = {}
    for key, field_name in (("mode", "mode"), ("model_name", "model"), ("base_url", "base_url"),
                            ("api_key_env", "api_key_env"), ("cassette", "cassette")):
        if overrides.get(key) is not None:
            model_kw[field_name] = overrides[key]
    run_kw: dict[str, Any] = {}
    if model_kw:
        run_kw["model"] = replace(cfg.model, **model_kw)
    if overrides.get("max_tokens") is not None:
        run_kw["budget"] = replace(cfg.budget, max_tokens=overrides["max_tokens"])
    if overrides.get("phi") is not None:
        run_kw["phi"] = SimilarityKind(overrides["phi"])
    for key in ("aggregation", "unparseable", "concurrency", "corpus_dir", "output_dir"):
        if overrides.get(key) is not None:
            run_kw[key] = overrides[key]
    return replace(cfg, **run_kw) if run_kw else cfg


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-data view of a configuration for run manifests."""
    model = asdict(cfg.model)
    model["cassette"] = str(cfg.model.cassette) if cfg.model.cassette else None
    return {
        "model": model,
        "exemplar_ids": list(cfg.exemplar_ids),
        "budget": asdict(cfg.budget),
        "ceaf_phi": cfg.phi.value,
        "aggregation": cfg.aggregation,
        "unparseable": cfg.unparseable,
        "concurrency": cfg.concurrency,
        "corpus_dir": str(cfg.corpus_dir) if cfg.corpus_dir else None,
    }
