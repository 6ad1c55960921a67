#pragma once

#include <vector>

#include "shadowlab/image.hpp"

namespace shadowlab {

struct Point {
    double x = 0.0;  // column coordinate
    double y = 0.0;  // row coordinate
};

// Ordered vertex list; callers that search or sample polygons keep vertices
// within the image bounding box extended by a 50% margin per side.
struct Polygon {
    std::vector<Point> vertices;
};

// Even-odd membership of pixel centers (col+0.5, row+0.5). No anti-aliasing.
SignMask rasterize(const Polygon& poly, int width, int height);

// Per-pixel logical AND. Throws on dimension mismatch.
SignMask intersect(const SignMask& a, const SignMask& b);

SignMask full_mask(int width, int height);

}  // namespace shadowlab
