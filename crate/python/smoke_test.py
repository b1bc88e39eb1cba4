"""Smoke test for the sklyanin_py extension.

Build and install first:
    pip install --no-build-isolation -e crates/sklyanin-py
then run:
    python python/smoke_test.py
"""

import json

import sklyanin_py as sk

DIAGONAL = ["1", "0", "1", "0", "0", "1"]


def main() -> None:
    assert sk.SCHEMA_VERSION == 1

    report = json.loads(sk.realize(DIAGONAL))
    assert report["exit_code"] == 0, report["status"]
    assert report["data"]["Q"] == [["-1/2", "0", "0"], ["0", "-1/2", "0"], ["0", "0", "-1/2"]]

    # ints and "p/q" strings are both accepted, floats are not
    assert json.loads(sk.realize([2, 1, -3, "1/2", 1, 5]))["exit_code"] == 3
    try:
        sk.realize([0.5, 0, 1, 0, 0, 1])
    except ValueError:
        pass
    else:
        raise AssertionError("float parameter accepted")

    classical = json.loads(sk.classical_check())
    assert classical["exit_code"] == 3

    found, structure = sk.discover("1,0,1,0,0,1")
    assert json.loads(found)["mode"] == "discover"
    assert structure is not None
    checked = json.loads(sk.verify(structure))
    assert not [c for c in checked["checks"] if c["status"] == "fail"]

    doc = json.loads(structure)
    entry = next(e for e in doc["tables"]["ST"] if e["terms"])
    term = entry["terms"][0]
    term["coefficient"] = "3" if term["coefficient"] == "1" else "1"
    assert json.loads(sk.verify(json.dumps(doc)))["exit_code"] == 2

    assert sk.sweep(seed=7, count=5) == sk.sweep(seed=7, count=5)
    print("smoke test passed")


if __name__ == "__main__":
    main()
