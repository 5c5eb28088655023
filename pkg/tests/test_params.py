import json

import pytest

from vfabric.params import ConfigError, alpha, bundle_from_document, dump_config, load_config


def test_defaults_load(bundle):
    assert set(bundle.fabrics) == {"skybridge", "cmos1", "cmos2"}
    assert bundle.fabric("cmos2").rent_k == pytest.approx(3.416)
    assert bundle.layout.gates_per_nanowire == 2


def test_unknown_parameter_set(bundle):
    with pytest.raises(ConfigError, match="unknown parameter set"):
        bundle.fabric("cmos9")


def test_partial_override_keeps_other_defaults():
    b = bundle_from_document({"fabrics": {"cmos1": {"n_gates": 1000}}})
    assert b.fabric("cmos1").n_gates == 1000
    assert b.fabric("cmos1").rent_k == load_config().fabric("cmos1").rent_k


@pytest.mark.parametrize("doc, msg", [
    ({"fabrics": {"cmos1": {"rent_p": 1.2}}}, "rent_p"),
    ({"fabrics": {"cmos1": {"bogus": 1}}}, "unknown field"),
    ({"nonsense": {}}, "top-level"),
    ([], "object"),
])
def test_invalid_documents(doc, msg):
    with pytest.raises(ConfigError, match=msg):
        bundle_from_document(doc)


def test_dump_round_trip(tmp_path, bundle):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(dump_config(bundle)))
    assert load_config(path) == bundle


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError, match="parse error"):
        load_config(bad)


def test_alpha():
    assert alpha(3) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        alpha(0)
