#!/usr/bin/env python3
"""Smoke test for the stixelpy extension module.

Builds nothing itself: run `cargo build -p stixel-py` (or `--release`)
first. The script locates the compiled cdylib, exposes it as the module
`stixelpy` and exercises the main types and operations, including a
cross-language check of the tensor file format written with `struct`.
"""

import math
import shutil
import struct
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libstixelpy.so",
        REPO / "target" / "debug" / "libstixelpy.so",
        REPO / "target" / "release" / "libstixelpy.dylib",
        REPO / "target" / "debug" / "libstixelpy.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p stixel-py")
    stage = Path(tempfile.mkdtemp(prefix="stixelpy-"))
    shutil.copy2(built, stage / "stixelpy.so")
    sys.path.insert(0, str(stage))
    import stixelpy

    return stixelpy


checks = 0


def check(name, ok):
    global checks
    checks += 1
    if not ok:
        sys.exit(f"FAIL {name}")
    print(f"ok   {name}")


def write_single_cell_tensor(path, bins=64, cols=240):
    """SNXT tensor with one confident cell at (bin 6, col 100)."""
    data = [0.0] * (3 * bins * cols)
    data[(0 * bins + 6) * cols + 100] = 0.25  # v_top
    data[(1 * bins + 6) * cols + 100] = 0.50  # v_bot
    data[(2 * bins + 6) * cols + 100] = 0.90  # prob
    with open(path, "wb") as f:
        f.write(b"SNXT")
        f.write(struct.pack("<BHHHII", 1, 3, bins, cols, 1920, 1280))
        f.write(struct.pack(f"<{len(data)}f", *data))


def main():
    sp = load_module()

    # Depth grids.
    grid = sp.Grid.linear(64, 4.0, 66.0)
    check("linear grid step", abs(grid.anchors[1] - grid.anchors[0] - 0.96875) < 1e-12)
    check("linear anchor 10", grid.anchors[10] == 13.6875)
    check("depth_to_bin floor", grid.depth_to_bin(10.0) == 6)

    tangential = sp.Grid.default_tangential()
    within_30 = sum(1 for d in tangential.anchors if d <= 30.0)
    check("tangential 43 anchors within 30 m", within_30 == 43)
    a = sp.Grid.calibrate_a(64, 4.0, 66.0, 43, 30.0)
    check("calibrated tangent factor near 2.65", abs(a - 2.65) < 0.05)

    # Projection.
    calib = sp.Calib(2000.0, 2000.0, 960.0, 640.0, 1920, 1280)
    u, v, w = calib.project(1.0, 1.0, 10.0)
    check("projection hand value", (u, v, w) == (1160.0, 840.0, 10.0))
    x, y, z = calib.backproject(u, v, w)
    check("backprojection round trip", max(abs(x - 1), abs(y - 1), abs(z - 10)) < 1e-9)

    # Losses.
    check("bce at symmetry point", abs(sp.bce([0.5], [1.0]) - math.log(2)) < 1e-12)
    check("depth weight endpoints",
          sp.depth_weight(4.0) == 1.0 and sp.depth_weight(66.0) == 2.0)
    collapse = sp.wbce([0.3, 0.9], [0.0, 1.0], [10.0, 50.0], alpha_max=1.0)
    check("wbce collapses to bce", abs(collapse - sp.bce([0.3, 0.9], [0.0, 1.0])) < 1e-12)

    # Tensor decoding straight from a file written here with struct.
    with tempfile.TemporaryDirectory() as tmp:
        tensor_path = Path(tmp) / "cell.snxt"
        write_single_cell_tensor(tensor_path)
        world, dropped = sp.decode_tensor(str(tensor_path), calib, grid, 0.38)
        check("decode finds the single cell", len(world) == 1 and dropped == 0)
        s = world.stixels[0]
        check("decoded stixel fields",
              (s.col, s.v_top, s.v_bot, s.depth) == (100, 320, 640, 9.8125))

    # World interchange.
    world = sp.World(calib, grid, "py-frame")
    world.add(sp.Stixel(100, 320, 640, 9.8125, 0.9, label="vehicle"))
    world.add(sp.Stixel(101, 300, 660, 10.5, 0.8))
    round_tripped = sp.World.from_json(world.to_json())
    check("json round trip", round_tripped.to_json() == world.to_json())
    blob = world.encode()
    check("wire size formula", len(blob) == 24 + 9 * len(world))
    decoded = sp.World.decode(blob, calib, "py-frame")
    check("wire round trip count", len(decoded) == len(world))
    check("label survives the wire", decoded.stixels[0].label == "vehicle")

    # Evaluation on a forward-facing camera.
    fwd = sp.Calib.forward_facing(2000.0, 2000.0, 960.0, 640.0, 1920, 1280, 2.0)
    empty = sp.World(fwd, grid, "empty")
    p, r, *_ = sp.precision_recall(empty, [])
    check("empty scene scores unity", (p, r) == (1.0, 1.0))

    scene = sp.World(fwd, grid, "scene")
    # Column 120 looks straight ahead; rows around cy land near z = 2.
    scene.add(sp.Stixel(120, 740, 940, 10.0, 0.9))
    box = sp.Box(10.0, 0.0, 1.0, 4.0, 2.0, 2.0, 0.0, "vehicle", 25)
    p, r, approved, predicted, hit, relevant = sp.precision_recall(scene, [box])
    check("contained stixel approves and hits",
          (p, r, approved, predicted, hit, relevant) == (1.0, 1.0, 1, 1, 1, 1))

    # Clustering: two separated groups.
    blobs = sp.World(calib, grid, "blobs")
    for i in range(10):
        blobs.add(sp.Stixel(120 + i, 600, 700, 10.0, 1.0))
        blobs.add(sp.Stixel(120 + i, 600, 700, 30.0, 1.0))
    assignment, extents = sp.cluster(blobs, eps=1.5, min_pts=3)
    check("two clusters found", len(extents) == 2)
    check("no noise in dense blobs", all(a is not None for a in assignment))

    # Holistic generation on a plane plus a post.
    points = [(4 + 0.2 * i, -4 + 0.2 * j, 0.0) for i in range(120) for j in range(40)]
    points += [(12.0, 0.02 * k, 0.5 + 0.06 * m) for k in range(6) for m in range(30)]
    gt = sp.generate_holistic(points, fwd, grid)
    check("post becomes stixels", len(gt) > 0)
    check("generated depths near the post", all(9.5 < s.depth < 14.5 for s in gt.stixels))

    print(f"\nPASS — {checks} checks")


if __name__ == "__main__":
    main()
