"""Smoke test for the idslab_py extension module.

Build and run from the repository root:

    cargo build -p idslab-python --features extension-module
    python3 python/smoke_test.py

The script looks for the shared library under target/ when the module is
not installed.
"""

import importlib.util
import math
import pathlib
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import idslab_py
        return idslab_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("libidslab_py.so", "libidslab_py.dylib", "idslab_py.dll"):
            lib = ROOT / "target" / profile / name
            if lib.exists():
                spec = importlib.util.spec_from_file_location("idslab_py", lib)
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                return module
    sys.exit("idslab_py not found; build it with --features extension-module")


CHAIN = """\
schema = 1
name = chain
model.kernel = nearest_neighbor
carrier.dim = 1
carrier.extent = 60
windows.n = 50, 100
lambdas.values = 0, 1
analysis.reference = analytic:free_chain_1d
"""

PERCOLATION = """\
schema = 1
name = perc
model.dilution = site(0.5)
carrier.dim = 2
carrier.extent = 12
windows.n = 10, 20
seeds.count = 3
lambdas.values = 0
"""


def main():
    ids = load()

    f = ids.StepFunction.from_atoms([(0.0, 0.5), (1.0, 0.5)])
    assert f(-1.0) == 0.0 and f(0.0) == 0.5 and f(1.0) == 1.0
    assert f.left_limit(0.0) == 0.0
    assert f.breakpoints == [0.0, 1.0]
    assert ids.StepFunction.from_csv(f.to_csv()) == f
    g = ids.StepFunction([0.0], [1.0])
    assert ids.sup_distance(f, g) == 0.5

    assert abs(ids.free_chain_ids(0.0) - 0.5) < 1e-15
    assert ids.parse_level("1/2")[1:] == (0.5, True)
    assert ids.parse_level("sqrt(2)")[2] is False

    chain = ids.Experiment(CHAIN)
    assert chain.validate() == []
    for n in chain.windows:
        counting = chain.counting(n, 0)
        assert abs(counting.total_mass() - 1.0) < 1e-12
        grid = [-2.0 + 4.0 * k / 400 for k in range(401)]
        dev = max(abs(counting(x) - ids.free_chain_ids(x)) for x in grid)
        assert dev <= 1.0 / (n + 1) + 1e-6, (n, dev)
    row = chain.jump(100, 0, "0")
    assert row["lower"] <= row["upper"]

    perc = ids.Experiment(PERCOLATION)
    for seed in perc.seeds:
        row = perc.jump(20, seed, "0")
        assert row["lower"] <= row["upper"], row
    exact = perc.jump(10, 0, "0", mode="exact")
    assert exact["D"] == perc.jump(10, 0, "0")["D"]

    bad = ids.Experiment(PERCOLATION.replace("extent = 12", "extent = 8"))
    assert any("carrier.extent" in d for d in bad.validate())

    with tempfile.TemporaryDirectory() as tmp:
        first = perc.run(pathlib.Path(tmp) / "a")
        second = perc.run(pathlib.Path(tmp) / "b")
        assert first == second and len(first) == 64
        try:
            bad.run(pathlib.Path(tmp) / "c")
        except ValueError as e:
            assert "carrier.extent" in str(e)
        else:
            raise AssertionError("undersized carrier accepted")
        assert not (pathlib.Path(tmp) / "c").exists()

    print("smoke test passed")


if __name__ == "__main__":
    main()
