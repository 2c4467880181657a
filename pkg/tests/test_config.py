"""Config schema, defaults, strictness, and canonical hashing."""

import json

import pytest

from cfarmismatch.config import (
    DEFAULTS,
    ConfigError,
    canonical_json,
    config_hash,
    from_dict,
    load_config,
    load_user_dict,
    normalize,
)


def test_empty_config_gets_defaults():
    norm = normalize({})
    assert norm == DEFAULTS
    assert norm is not DEFAULTS


def test_normalize_merges_nested_sections():
    norm = normalize({"scenario": {"n": 8}, "trials": {"pfa": 5000}})
    assert norm["scenario"]["n"] == 8
    assert norm["scenario"]["k"] == 32
    assert norm["trials"]["pfa"] == 5000
    assert norm["trials"]["pd"] == 100_000


def test_normalize_does_not_mutate_input_or_defaults():
    user = {"scenario": {"n": 8}}
    normalize(user)
    assert user == {"scenario": {"n": 8}}
    assert DEFAULTS["scenario"]["n"] == 16


@pytest.mark.parametrize(
    "bad",
    [
        {"unknown_key": 1},
        {"scenario": {"n": 16, "extra": 2}},
        {"mismatch": {"variant": "identity", "bogus": 1}},
        {"trials": {"warmup": 10}},
        {"detectors": [{"kind": "kelly", "threshold": 0.5}]},
    ],
)
def test_unknown_keys_rejected(bad):
    with pytest.raises(ConfigError):
        normalize(bad)


@pytest.mark.parametrize(
    "bad",
    [
        {"mismatch": {"variant": "wishart"}},
        {"detectors": []},
        {"detectors": [{"kappa": 2.0}]},
        {"detectors": [{"kind": "glrt"}]},
        {"scenario": {"rho1": 1.0}},
        {"scenario": {"n": 1}},
        {"pfa_target": 0.0},
        {"pfa_target": 1.5},
        {"seed": -1},
        {"clairvoyant_c": [1.0, 0.0]},
        {"out_dir": ""},
        {"trials": {"calibration": 10}},
    ],
)
def test_schema_rejects_bad_values(bad):
    with pytest.raises(ConfigError):
        normalize(bad)


def test_error_message_names_the_location():
    with pytest.raises(ConfigError, match="scenario"):
        normalize({"scenario": {"n": 1}})
    with pytest.raises(ConfigError, match=r"\(top level\)"):
        normalize({"unknown_key": 1})


def test_from_dict_builds_typed_config():
    cfg = from_dict(
        {
            "mismatch": {"variant": "inv_wishart", "delta_db": 3.0, "nu": 48},
            "detectors": [{"kind": "kelly"}, {"kind": "kalson", "kappa": 2.0}],
            "clairvoyant_c": [1, 2.5],
            "seed": 7,
        }
    )
    assert cfg.scenario.n == 16 and cfg.scenario.k == 32
    assert cfg.mismatch.variant == "inv_wishart"
    assert cfg.mismatch.nu == 48
    assert [d.kind for d in cfg.detectors] == ["kelly", "kalson"]
    assert cfg.detectors[1].kappa == 2.0
    assert cfg.clairvoyant_c == (1.0, 2.5)
    assert isinstance(cfg.clairvoyant_c[0], float)
    assert cfg.seed == 7
    assert cfg.normalized["seed"] == 7


def test_kalson_without_kappa_is_config_error():
    with pytest.raises(ConfigError, match="kappa"):
        from_dict({"detectors": [{"kind": "kalson"}]})


def test_kelly_with_kappa_is_config_error():
    with pytest.raises(ConfigError, match="kappa"):
        from_dict({"detectors": [{"kind": "kelly", "kappa": 2.0}]})


def test_semantic_scenario_error_becomes_config_error():
    # Passes the JSON schema (k >= 2) but violates k > n.
    with pytest.raises(ConfigError):
        from_dict({"scenario": {"n": 16, "k": 12}})


def test_canonical_json_is_sorted_and_compact():
    text = canonical_json({"b": 1, "a": {"d": 2, "c": [1, 2]}})
    assert text == '{"a":{"c":[1,2],"d":2},"b":1}'


def test_config_hash_ignores_key_order():
    n1 = normalize({"seed": 3, "scenario": {"n": 8, "k": 24}})
    n2 = normalize({"scenario": {"k": 24, "n": 8}, "seed": 3})
    assert config_hash(n1) == config_hash(n2)
    assert len(config_hash(n1)) == 64
    int(config_hash(n1), 16)


def test_config_hash_sensitive_to_values():
    n1 = normalize({"seed": 3})
    n2 = normalize({"seed": 4})
    assert config_hash(n1) != config_hash(n2)


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 99, "mismatch": {"variant": "eig_jitter"}}))
    cfg = load_config(str(path))
    assert cfg.seed == 99
    assert cfg.mismatch.variant == "eig_jitter"


def test_load_user_dict_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_user_dict("/nonexistent/cfg.json")


def test_load_user_dict_bad_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_user_dict(str(path))


def test_load_user_dict_non_object(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2, 3]")
    with pytest.raises(ConfigError, match="JSON object"):
        load_user_dict(str(path))


def test_config_error_is_value_error():
    assert issubclass(ConfigError, ValueError)
