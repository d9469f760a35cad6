"""One config object for the whole lab: paths, probabilities, budgets.

The CLI reads defaults from here; a JSON file (``fuzzgate config --out``)
overrides them.  The auth token comes from the ``FUZZGATE_TOKEN``
environment variable when set.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .generator import GeneratorConfig, MixProbabilities

CONFIG_FORMAT_VERSION = 1

TOKEN_ENV_VAR = "FUZZGATE_TOKEN"
DEFAULT_TOKEN = "local-dev-token"


def auth_token() -> str:
    return os.environ.get(TOKEN_ENV_VAR, DEFAULT_TOKEN)


@dataclass
class ExperimentConfig:
    versions: tuple[str, ...] = ("v1", "v5", "v10")
    environments: tuple[str, ...] = ("dev", "test", "prod")
    repetitions: int = 10
    budget: int = 3000
    master_seed: int = 7
    approaches: tuple[str, ...] = ("filtered", "unfiltered")

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        for approach in self.approaches:
            if approach not in ("filtered", "unfiltered"):
                raise ValueError(f"unknown approach {approach!r}")


@dataclass
class LabConfig:
    catalog_seed: int = 11
    collection_version: str = "v1"
    collection_environment: str = "dev"
    collection_budget: int = 15000
    collection_seed: int = 1234
    campaign_budget: int = 5000
    split_seed: int = 52
    train_seed: int = 7
    mix: MixProbabilities = field(default_factory=MixProbabilities)
    messages_min: int = 1
    messages_max: int = 3
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def generator_config(self, budget: int, seed: int) -> GeneratorConfig:
        return GeneratorConfig(
            seed=seed,
            budget=budget,
            mix=self.mix,
            messages_min=self.messages_min,
            messages_max=self.messages_max,
        )

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["format_version"] = CONFIG_FORMAT_VERSION
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "LabConfig":
        if doc.get("format_version") != CONFIG_FORMAT_VERSION:
            raise ValueError(f"unsupported config version {doc.get('format_version')!r}")
        experiment = doc.get("experiment", {})
        return cls(
            catalog_seed=doc["catalog_seed"],
            collection_version=doc["collection_version"],
            collection_environment=doc["collection_environment"],
            collection_budget=doc["collection_budget"],
            collection_seed=doc["collection_seed"],
            campaign_budget=doc["campaign_budget"],
            split_seed=doc["split_seed"],
            train_seed=doc["train_seed"],
            mix=MixProbabilities(**doc["mix"]),
            messages_min=doc["messages_min"],
            messages_max=doc["messages_max"],
            experiment=ExperimentConfig(
                versions=tuple(experiment.get("versions", ("v1", "v5", "v10"))),
                environments=tuple(experiment.get("environments", ("dev", "test", "prod"))),
                repetitions=experiment.get("repetitions", 10),
                budget=experiment.get("budget", 3000),
                master_seed=experiment.get("master_seed", 7),
                approaches=tuple(experiment.get("approaches", ("filtered", "unfiltered"))),
            ),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LabConfig":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
