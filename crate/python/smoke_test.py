"""Smoke test for the jxeskit extension module.

Build first:
    cargo build -p jxeskit-py --release --features extension-module
then run:
    python3 python/smoke_test.py [path/to/libjxeskit.so]
"""

import importlib.machinery
import importlib.util
import os
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load(path):
    loader = importlib.machinery.ExtensionFileLoader("jxeskit", str(path))
    spec = importlib.util.spec_from_loader("jxeskit", loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    lib = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "target" / "release" / "libjxeskit.so"
    jx = load(lib)
    fixtures = ROOT / "crates" / "core" / "tests" / "fixtures"

    log = jx.EventLog.read(str(fixtures / "basic_structure.json"))
    assert log.stats() == {"traces": 1, "events": 2, "variants": 1, "activities": 2, "max_trace_length": 2}, log.stats()
    assert len(log) == 1 and log.event_count == 2

    streamed = jx.EventLog.from_jxes(log.to_jxes(), backend="streaming")
    assert streamed == log
    assert jx.EventLog.from_xes(log.to_xes()) == log
    assert streamed.canonical() == log.canonical()

    gen = jx.generate(preset="level_d2", seed=7, traces=50)
    assert gen.trace_count == 50
    assert jx.generate(preset="level_d2", seed=7, traces=50).canonical() == gen.canonical()
    assert len(gen.encode("JXES-gz")) < len(gen.encode("JXES"))

    assert jx.validate(log.canonical()) == []
    diags = jx.validate('{"traces": 1}')
    assert diags and diags[0]["severity"] == "error", diags

    try:
        jx.EventLog.from_jxes('{"traces": [1, }')
    except jx.JxesError as err:
        assert "MalformedJson" in str(err), err
    else:
        raise AssertionError("malformed input was accepted")

    with tempfile.TemporaryDirectory() as tmp:
        src = os.path.join(tmp, "gen.json")
        dst = os.path.join(tmp, "gen.xes.gz")
        assert gen.save(src) == os.path.getsize(src)
        assert jx.convert(src, dst) == os.path.getsize(dst)
        assert jx.EventLog.read(dst) == gen

    print(f"jxeskit {jx.__version__}: python smoke test passed")


if __name__ == "__main__":
    main()
