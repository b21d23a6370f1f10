# Cusp Picture -> SVG / PNG drawing of a developed cusp
"""
Inputs:
    - CuspDiagram (developed cusp triangles and lattice translations)
    - Hexagons extracted from it (optional)

Outputs:
    - SVG text on a fixed 1000x1000 viewport, written to disk when a path is given
    - PNG (or any Pillow format) with optional in-memory image / base64 copy

Description:
    Draws the fundamental domain of cusp triangles, the lattice parallelogram,
    the hexagon outlines and the horoball circles seen from the cusp.
"""

import base64
import io
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from PIL import Image, ImageDraw

from algorithms.cusp import CuspDiagram, Hexagon

VIEWPORT = 1000
MARGIN = 40

HEXAGON_COLOURS = ("#c0392b", "#2471a3", "#229954", "#b9770e")


def _circles(d: CuspDiagram) -> List[Tuple[complex, float]]:
    seen: Dict[Tuple[float, float], Tuple[complex, float]] = {}
    for (tet, v), corners in d.positions.items():
        for w, point in corners.items():
            key = (round(point.real, 6), round(point.imag, 6))
            if key not in seen:
                seen[key] = (point, d.corner_diameter(tet, v, w))
    return list(seen.values())


def _projection(d: CuspDiagram, hexagons: Sequence[Hexagon], size: int) -> Callable[[complex], Tuple[float, float]]:
    points = [p for corners in d.positions.values() for p in corners.values()]
    points += [0j, d.t_mu, d.t_lambda, d.t_mu + d.t_lambda]
    for h in hexagons:
        points += list(h.raw)
    xs, ys = [p.real for p in points], [p.imag for p in points]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    scale = (size - 2 * MARGIN) / span
    x0, y1 = min(xs), max(ys)

    def project(u: complex) -> Tuple[float, float]:
        # screen y grows downwards
        return MARGIN + (u.real - x0) * scale, MARGIN + (y1 - u.imag) * scale

    project.scale = scale
    return project


def render_svg(d: CuspDiagram, hexagons: Sequence[Hexagon] = (), output_path: Optional[str] = None) -> str:
    project = _projection(d, hexagons, VIEWPORT)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{VIEWPORT}" height="{VIEWPORT}" '
        f'viewBox="0 0 {VIEWPORT} {VIEWPORT}">',
        f'<rect width="{VIEWPORT}" height="{VIEWPORT}" fill="white"/>',
    ]

    def polygon(points, stroke, width, fill="none"):
        coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in map(project, points))
        out.append(f'<polygon points="{coords}" fill="{fill}" stroke="{stroke}" stroke-width="{width}"/>')

    for tri in sorted(d.positions):
        polygon(d.triangle(tri), "#999999", 0.6)
    polygon([0j, d.t_mu, d.t_mu + d.t_lambda, d.t_lambda], "#000000", 1.5)
    for i, h in enumerate(hexagons):
        polygon(h.raw, HEXAGON_COLOURS[i % len(HEXAGON_COLOURS)], 2.5)
    for centre, diameter in _circles(d):
        x, y = project(centre)
        out.append(
            f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{diameter * project.scale / 2:.3f}" '
            f'fill="none" stroke="#7d3c98" stroke-width="0.8"/>'
        )
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if output_path:
        with open(output_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    return text


def render_png(
    d: CuspDiagram,
    hexagons: Sequence[Hexagon] = (),
    size: int = VIEWPORT,
    back_color: str = "white",
    file_format: str = "png",
    output_path: Optional[str] = "cusp.png",
    return_image: bool = False,
    return_base64: bool = False,
):
    project = _projection(d, hexagons, size)
    img = Image.new("RGB", (size, size), back_color)
    draw = ImageDraw.Draw(img)

    for tri in sorted(d.positions):
        draw.polygon([project(p) for p in d.triangle(tri)], outline="#999999")
    corners = [0j, d.t_mu, d.t_mu + d.t_lambda, d.t_lambda]
    draw.line([project(p) for p in corners + corners[:1]], fill="#000000", width=2)
    for i, h in enumerate(hexagons):
        loop = [project(p) for p in h.raw]
        draw.line(loop + loop[:1], fill=HEXAGON_COLOURS[i % len(HEXAGON_COLOURS)], width=3)
    for centre, diameter in _circles(d):
        x, y = project(centre)
        r = diameter * project.scale / 2
        draw.ellipse((x - r, y - r, x + r, y + r), outline="#7d3c98")

    results = {"file_path": output_path}
    if output_path:
        img.save(output_path, format=file_format.upper())

    if return_image:
        results["image_obj"] = img

    if return_base64:
        buffer = io.BytesIO()
        img.save(buffer, format=file_format.upper())
        results["base64"] = base64.b64encode(buffer.getvalue()).decode("utf-8")

    return results


# Main Execution
if __name__ == "__main__":
    from algorithms.cusp import develop_cusp, extract_hexagons
    from algorithms.farey import reduce
    from algorithms.geometry import derive_equations, solve_with_restarts
    from algorithms.triangulate import assemble_filled

    t = assemble_filled(reduce(1, 3), reduce(1, 3))
    diagram = develop_cusp(t, solve_with_restarts(derive_equations(t)))
    hexes = extract_hexagons(diagram)
    render_svg(diagram, hexes, "cusp.svg")
    print(render_png(diagram, hexes, output_path="cusp.png"))


"""
    Summary:
    Presentation-only drawings of the developed cusp.
    Key features:
    - Fixed 1000x1000 SVG viewport scaled to the fundamental domain.
    - Hexagon outlines in distinct colours, horoball circles at every cusp vertex.
    - Pillow raster output with optional image object and base64 payload.
    Core flow:
    - _projection -> render_svg / render_png
    Dependencies:
    - Pillow
"""
