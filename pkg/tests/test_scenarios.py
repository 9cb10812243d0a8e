import hashlib

import pytest

from traverse_lab.errors import ConfigError
from traverse_lab.scenarios import BUILTIN, builtin, load, parse_scenario

GOOD = b"""
name = "tiny"
kind = "flow"
[domain]
w = "1 - x^2 - y^2"
bbox = [-1.5, 1.5, -1.5, 1.5]
[field]
vx = "1"
vy = "0"
"""


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtins_validate(name):
    scn = builtin(name)
    assert scn.name and scn.kind in {"flow", "billiard", "local_model", "poset"}
    assert len(scn.digest) == 64


def test_digest_is_sha256_of_bytes():
    assert parse_scenario(GOOD).digest == hashlib.sha256(GOOD).hexdigest()


def test_load_file_and_builtin(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_bytes(GOOD)
    scn = load(p)
    assert scn.get("domain", "w") == "1 - x^2 - y^2"
    assert scn.get("samples", "N", default=7) == 7
    assert scn.seed == 0
    assert load("disk").name == "disk"


@pytest.mark.parametrize("raw", [
    b"name = ",                                                  # bad TOML
    GOOD.replace(b'kind = "flow"', b'kind = "teapot"'),           # not in the enum
    GOOD.replace(b"[domain]\n", b"[dom]\n"),                      # missing domain
    GOOD.replace(b'vx = "1"', b'vx = "1 +* x"'),                  # unparsable expression
    GOOD.replace(b"bbox = [-1.5, 1.5, -1.5, 1.5]", b"bbox = [0, 1]"),
], ids=["bad-toml", "bad-kind", "no-domain", "bad-expression", "short-bbox"])
def test_bad_scenarios_raise_config_error(raw):
    with pytest.raises(ConfigError):
        parse_scenario(raw)


def test_missing_file_and_unknown_builtin(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "nope.toml")
    with pytest.raises(ConfigError):
        builtin("nope")
