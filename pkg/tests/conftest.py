import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make refdata importable

from fuzzgate.catalog import generate_catalog
from fuzzgate.config import DEFAULT_TOKEN
from fuzzgate.features import build_features, refine, select_features, split
from fuzzgate.forest import ForestHyperparams, train_forest
from fuzzgate.generator import GeneratorConfig, run_collection
from fuzzgate.rules import parse_rule
from fuzzgate.schema import default_api_schema
from fuzzgate.service import RegistryService, ServiceConfig
from fuzzgate.transport import InProcessTransport

CATALOG_SEED = 11


@pytest.fixture(scope="session")
def catalog():
    return generate_catalog(CATALOG_SEED)


@pytest.fixture(scope="session")
def v1_dev(catalog):
    return catalog.ruleset("v1", "dev")


@pytest.fixture()
def service(v1_dev):
    return RegistryService(
        v1_dev, ServiceConfig(versionId="v1", environment="dev", authToken=DEFAULT_TOKEN)
    )


@pytest.fixture(scope="session")
def r03_prod():
    """The breast-cancer topography rule in its production shape."""
    return parse_rule(
        "Topografi ->startswith('50') implies Metastase in ['0', 'A', 'B', 'C', 'D', '9']",
        rule_id="R03",
        kind="validation",
        scope="Breast",
    )


@pytest.fixture(scope="session")
def r03_test():
    """Same rule with the extra constraint the test environment carries."""
    return parse_rule(
        "(Topografi ->startswith('50') and Ekstralokalisasjon != '7777') "
        "implies Metastase in ['0', 'A', 'B', 'C', 'D', '9']",
        rule_id="R03",
        kind="validation",
        scope="Breast",
    )


def valid_message(**overrides):
    msg = {
        "meldingstype": "K",
        "topografi": "509",
        "metastase": "A",
        "ekstralokalisasjon": "1234",
        "diagnosedato": "2017-12-01",
        "cancerType": "Breast",
    }
    msg.update(overrides)
    return msg


def make_service(ruleset):
    return RegistryService(
        ruleset,
        ServiceConfig(
            versionId=ruleset.versionId,
            environment=ruleset.environment,
            authToken=DEFAULT_TOKEN,
        ),
    )


@pytest.fixture(scope="session")
def trained_pipeline(catalog):
    """A small but competent trained gate model on v1/dev collection data.

    Uses a reduced budget and tree count so the fixture builds in a couple
    of seconds; the signal is strong enough that the gate behaves like the
    full-scale model.
    """
    ruleset = catalog.ruleset("v1", "dev")
    transport = InProcessTransport(make_service(ruleset))
    config = GeneratorConfig(seed=501, budget=2500)
    records = run_collection(
        default_api_schema(), config, transport, DEFAULT_TOKEN, "dev", "v1", None
    )
    flats = refine([__import__("json").loads(r.to_json_line()) for r in records])
    matrix, schema = build_features(flats)
    train, test = split(matrix, ratio=0.8, seed=52)

    hp = ForestHyperparams(n_estimators=15)

    def importance_fn(m):
        return train_forest(m, hp, seed=9).feature_importances()

    train, schema = select_features(train, schema, importance_fn)
    model = train_forest(train, hp, seed=9, schema_fingerprint=schema.fingerprint())
    return {
        "catalog": catalog,
        "ruleset": ruleset,
        "model": model,
        "schema": schema,
        "config": config,
        "train": train,
    }
