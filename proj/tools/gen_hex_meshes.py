#!/usr/bin/env python3
"""Generate the bundled hexagonal mesh family on the unit square.

Level l tiles the plane with pointy-top hexagons, 9 * 2**l columns and
10 * 2**l row spacings, and clips the tiling to [0, 1]^2. Hexagons are
slightly stretched vertically so that x = 0, 1 and y = 0, 1 pass through
hexagon centres or along hexagon edges; clipping then never creates slivers.
Interior cells are hexagons, boundary cells are halves or quarters.

Usage: gen_hex_meshes.py OUTPUT_DIR [--levels 4]
"""

import argparse
import pathlib

from shapely.geometry import Polygon, box
from shapely.geometry.polygon import orient


def hexagon(cx, cy, half_width, radius):
    return Polygon([
        (cx, cy - radius),
        (cx + half_width, cy - radius / 2),
        (cx + half_width, cy + radius / 2),
        (cx, cy + radius),
        (cx - half_width, cy + radius / 2),
        (cx - half_width, cy - radius / 2),
    ])


def build(level):
    columns = 9 * 2**level
    rows = 10 * 2**level
    width = 1.0 / columns
    spacing = 1.0 / rows
    radius = spacing / 1.5
    domain = box(0.0, 0.0, 1.0, 1.0)

    vertex_ids = {}
    vertices = []
    cells = []

    def vertex(x, y):
        key = (round(x, 12), round(y, 12))
        if key not in vertex_ids:
            vertex_ids[key] = len(vertices)
            vertices.append((x, y))
        return vertex_ids[key]

    for j in range(rows + 1):
        cy = j * spacing
        offset = 0.0 if j % 2 == 0 else 0.5 * width
        for i in range(-1, columns + 2):
            cx = i * width + offset
            piece = hexagon(cx, cy, 0.5 * width, radius).intersection(domain)
            if piece.is_empty or piece.geom_type != "Polygon" or piece.area < 1e-14:
                continue
            coords = list(orient(piece, 1.0).exterior.coords)[:-1]
            loop = []
            for x, y in coords:
                v = vertex(x, y)
                if not loop or loop[-1] != v:
                    loop.append(v)
            if loop[0] == loop[-1]:
                loop.pop()
            cells.append(loop)
    return vertices, cells


def write(path, vertices, cells, level):
    with open(path, "w") as out:
        out.write(f"# hexagonal family, level {level}\n")
        out.write(f"VERTICES {len(vertices)}\n")
        for x, y in vertices:
            out.write(f"{x!r} {y!r}\n")
        out.write(f"CELLS {len(cells)}\n")
        for loop in cells:
            out.write(" ".join(str(v) for v in [len(loop), *loop]) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("output_dir", type=pathlib.Path)
    parser.add_argument("--levels", type=int, default=4)
    args = parser.parse_args()
    args.output_dir.mkdir(parents=True, exist_ok=True)
    for level in range(args.levels):
        vertices, cells = build(level)
        write(args.output_dir / f"hexa_{level}.txt", vertices, cells, level)
        print(f"level {level}: {len(cells)} cells, {len(vertices)} vertices")


if __name__ == "__main__":
    main()
