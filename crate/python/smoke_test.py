"""Smoke test for the pythickwalk extension.

Imports an installed module if there is one; otherwise builds the extension
with cargo and loads it from the build directory.
"""

import importlib
import math
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    try:
        return importlib.import_module("pythickwalk")
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--release", "-p", "pythickwalk", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = os.path.join(ROOT, "target", "release", "libpythickwalk.so")
    tmp = tempfile.mkdtemp()
    shutil.copy(lib, os.path.join(tmp, "pythickwalk.so"))
    sys.path.insert(0, tmp)
    return importlib.import_module("pythickwalk")


def trefoil(points=60):
    out = []
    for k in range(points):
        t = 2 * math.pi * k / points
        out.append((math.sin(t) + 2 * math.sin(2 * t), math.cos(t) - 2 * math.cos(2 * t), -math.sin(3 * t)))
    return out


def main():
    tw = load()

    w = tw.Walk.straight(10)
    assert w.n == 10 and len(w.vertices()) == 11
    assert math.isinf(tw.dcsd(w)[0])
    assert tw.accommodates_tube(w, 1.0)
    assert abs(w.radius_of_gyration2() - 10.0) < 1e-9  # n(n+2)/12 for n = 10
    bent = w.reflect_tail(5, (0.0, 1.0, 0.0))
    assert abs(bent.end_to_end2() - w.end_to_end2()) < 1e-9

    chain = tw.Chain(40, 0.2, seed=3)
    samples = chain.sample(20, 40)
    proposed, accepted, rate = chain.stats()
    assert len(samples) == 20 and accepted <= proposed and 0 < rate <= 1
    assert all(tw.accommodates_tube(s, 0.2) for s in samples)

    again = tw.Chain(40, 0.2, seed=3).sample(20, 40)
    assert [s.vertices() for s in samples] == [s.vertices() for s in again]

    assert tw.classify_polygon(trefoil()) == "3_1"
    level, winner, fraction = tw.dominant_knot(w.vertices(), closures=10)
    assert winner == "0_1" and fraction == 1.0 and level == "strong"

    nu, _, _, _ = tw.fit_power_law([(n, 2.0 * n**1.5) for n in (10, 20, 40, 80)])
    assert abs(nu - 1.5) < 1e-12

    try:
        tw.Walk([(0, 0, 0), (2, 0, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("non-unit edge accepted")

    print("pythickwalk smoke test passed")


if __name__ == "__main__":
    main()
