"""Shared settings: built-in defaults < config file < command-line flags.

The config file is INI with one ``[mmkg]`` section; its path comes from
``--config`` or the ``MMKG_CONFIG`` environment variable. Keys:

    dedupe_threshold     semantic dedup cosine cut-off        (0.95)
    mismatch_threshold   image/text cosine floor              (0.30)
    theta_match          token-F1 at or above which: Match    (0.85)
    theta_halluc         token-F1 below which: Hallucination  (0.60)
    tau                  retrieval confidence threshold       (0.5)
    k                    K-Means clusters                     (50)
    seed                 K-Means seed                         (42)
    per_cluster_cap      balance cap; empty disables balance  ()
    jobs                 worker threads                       (1)
    retrieval_latency    mock retrieval latency, seconds      (0.15)
    generation_latency   mock generation latency, seconds     (6.8)
    embedder             "hashing" or an http(s) base URL     (hashing)
    embed_dim            vector size                          (256)
"""
from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass

from .errors import ValidationError

SECTION = "mmkg"
ENV_VAR = "MMKG_CONFIG"


@dataclass
class Settings:
    dedupe_threshold: float = 0.95
    mismatch_threshold: float = 0.30
    theta_match: float = 0.85
    theta_halluc: float = 0.60
    tau: float = 0.5
    k: int = 50
    seed: int = 42
    per_cluster_cap: int | None = None
    jobs: int = 1
    retrieval_latency: float = 0.15
    generation_latency: float = 6.8
    embedder: str = "hashing"
    embed_dim: int = 256

    def validate(self) -> "Settings":
        if not 0 < self.dedupe_threshold < 1:
            raise ValidationError("dedupe_threshold must be in (0, 1)")
        if not 0 <= self.mismatch_threshold < 1:
            raise ValidationError("mismatch_threshold must be in [0, 1)")
        if not 0 <= self.theta_halluc < self.theta_match <= 1:
            raise ValidationError("need 0 <= theta_halluc < theta_match <= 1")
        if self.tau < 0:
            raise ValidationError("tau must be >= 0")
        if self.k < 1 or self.jobs < 1 or self.embed_dim < 2:
            raise ValidationError("k and jobs must be >= 1, embed_dim >= 2")
        if self.per_cluster_cap is not None and self.per_cluster_cap < 1:
            raise ValidationError("per_cluster_cap must be >= 1")
        return self

    def replace(self, **overrides) -> "Settings":
        changes = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **changes).validate()


def _convert(name: str, raw: str):
    kinds = {f.name: f.type for f in dataclasses.fields(Settings)}
    kind = kinds[name]
    raw = raw.strip()
    try:
        if kind.startswith("int"):
            return None if raw == "" and "None" in kind else int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ValidationError(f"config key {name!r}: cannot parse {raw!r}") from None
    return raw


def load_settings(path: str | None = None) -> Settings:
    """Read settings from ``path``, else ``$MMKG_CONFIG``, else defaults."""
    path = path or os.environ.get(ENV_VAR)
    settings = Settings()
    if not path:
        return settings
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        try:
            parser.read_file(fh)
        except configparser.Error as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if not parser.has_section(SECTION):
        raise ValidationError(f"{path}: missing [{SECTION}] section")
    known = {f.name for f in dataclasses.fields(Settings)}
    values = {}
    for key, raw in parser.items(SECTION):
        if key not in known:
            raise ValidationError(f"{path}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return dataclasses.replace(settings, **values).validate()
