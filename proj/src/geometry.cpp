#include "shadowlab/geometry.hpp"

namespace shadowlab {

namespace {

// Even-odd rule via horizontal ray cast toward +x. Half-open vertex rule
// ((y1 > py) != (y2 > py)) so horizontal edges and repeated crossings at
// shared vertices are counted consistently.
bool point_in_polygon(const Polygon& poly, double px, double py) {
    bool inside = false;
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double x1 = v[j].x, y1 = v[j].y;
        const double x2 = v[i].x, y2 = v[i].y;
        if ((y1 > py) != (y2 > py)) {
            double xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1);
            if (px < xint) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

SignMask rasterize(const Polygon& poly, int width, int height) {
    SignMask mask(width, height, false);
    if (poly.vertices.size() < 3) return mask;
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            mask.set(row, col, point_in_polygon(poly, col + 0.5, row + 0.5));
        }
    }
    return mask;
}

SignMask intersect(const SignMask& a, const SignMask& b) {
    require_same_dims(a.width, a.height, b.width, b.height, "intersect");
    SignMask out(a.width, a.height, false);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = (a.data[i] != 0 && b.data[i] != 0) ? 1 : 0;
    }
    return out;
}

SignMask full_mask(int width, int height) { return SignMask(width, height, true); }

}  // namespace shadowlab
