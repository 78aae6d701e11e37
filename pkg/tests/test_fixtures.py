import shutil

import pytest

from selmask.errors import FixtureError
from selmask.fixtures import DATA_DIR, load_fixture, manifest
from selmask.tokenizer import load_vocab


def test_all_assets_verify():
    for name in manifest():
        assert load_fixture(name)


def test_toy_vocab_parses(tmp_path):
    data = load_fixture("toy_vocab")
    assert len(data.decode().splitlines()) == 120
    p = tmp_path / "v.txt"
    p.write_bytes(data)
    assert len(load_vocab(p)) == 120


def test_unknown_name():
    with pytest.raises(FixtureError, match="unknown fixture"):
        load_fixture("nope")


def test_corrupted_asset(tmp_path):
    root = tmp_path / "data"
    shutil.copytree(DATA_DIR, root)
    with open(root / "toy_vocab.txt", "a") as fh:
        fh.write("extra\n")
    with pytest.raises(FixtureError, match="checksum mismatch"):
        load_fixture("toy_vocab", root)


def test_generator_reproduces_assets(tmp_path):
    import runpy
    from pathlib import Path

    script = Path(__file__).resolve().parents[1] / "scripts" / "make_fixtures.py"
    if not script.exists():
        pytest.skip("generator script not shipped")
    runpy.run_path(str(script), run_name="gen")["main"](tmp_path)
    assert (tmp_path / "MANIFEST.json").read_bytes() == (DATA_DIR / "MANIFEST.json").read_bytes()
