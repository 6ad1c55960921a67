#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "shadowlab/geometry.hpp"
#include "support/oracles.hpp"

using namespace shadowlab;

namespace {

Polygon triangle(double x1, double y1, double x2, double y2, double x3, double y3) {
    return Polygon{{{x1, y1}, {x2, y2}, {x3, y3}}};
}

Polygon random_polygon(std::mt19937& rng, int vertices, double lo, double hi) {
    Polygon poly;
    std::uniform_real_distribution<double> d(lo, hi);
    for (int i = 0; i < vertices; ++i) poly.vertices.push_back(Point{d(rng), d(rng)});
    return poly;
}

}  // namespace

TEST_CASE("triangle covering the whole image rasterizes to all-true") {
    SignMask m = rasterize(triangle(-100, -100, 100, -100, 0, 200), 8, 8);
    CHECK(m.count_true() == 64);
}

TEST_CASE("degenerate zero-area polygon rasterizes to all-false") {
    SignMask m = rasterize(triangle(0, 0, 10, 0, 5, 0), 8, 8);
    CHECK(m.count_true() == 0);
}

TEST_CASE("axis-aligned square hits exactly the pixels whose centers fall inside") {
    SignMask m = rasterize(Polygon{{{2, 2}, {5, 2}, {5, 5}, {2, 5}}}, 8, 8);
    // centers (2.5..4.5) in both axes -> the 3x3 block, verified per pixel
    // against the independent membership oracle
    for (int row = 0; row < 8; ++row) {
        for (int col = 0; col < 8; ++col) {
            const bool expected = row >= 2 && row <= 4 && col >= 2 && col <= 4;
            CHECK(m.at(row, col) == expected);
            CHECK(m.at(row, col) == testing::oracle_point_in_polygon(
                                        Polygon{{{2, 2}, {5, 2}, {5, 5}, {2, 5}}}, col + 0.5,
                                        row + 0.5));
        }
    }
}

TEST_CASE("rasterize agrees with the independent even-odd oracle") {
    std::mt19937 rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const int vertices = 3 + static_cast<int>(rng() % 4);
        Polygon poly = random_polygon(rng, vertices, -8.0, 24.0);
        SignMask m = rasterize(poly, 16, 16);
        for (int row = 0; row < 16; ++row)
            for (int col = 0; col < 16; ++col)
                REQUIRE(m.at(row, col) ==
                        testing::oracle_point_in_polygon(poly, col + 0.5, row + 0.5));
    }
}

TEST_CASE("rasterize is translation-consistent for integer shifts") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Polygon poly = random_polygon(rng, 3, 2.0, 14.0);
        const int dx = static_cast<int>(rng() % 5) - 2;
        const int dy = static_cast<int>(rng() % 5) - 2;
        Polygon shifted = poly;
        for (auto& v : shifted.vertices) {
            v.x += dx;
            v.y += dy;
        }
        SignMask base = rasterize(poly, 24, 24);
        SignMask moved = rasterize(shifted, 24, 24);
        for (int row = 0; row < 24; ++row)
            for (int col = 0; col < 24; ++col) {
                const int sr = row - dy, sc = col - dx;
                if (sr < 0 || sr >= 24 || sc < 0 || sc >= 24) continue;
                REQUIRE(moved.at(row, col) == base.at(sr, sc));
            }
    }
}

TEST_CASE("intersect is a per-pixel AND with identity and annihilator") {
    std::mt19937 rng(9);
    SignMask a(4, 4), b(4, 4);
    for (auto& v : a.data) v = rng() % 2;
    for (auto& v : b.data) v = rng() % 2;

    SignMask both = intersect(a, b);
    for (std::size_t i = 0; i < both.data.size(); ++i)
        CHECK(both.data[i] == ((a.data[i] != 0 && b.data[i] != 0) ? 1 : 0));

    CHECK(intersect(a, full_mask(4, 4)) == a);
    CHECK(intersect(a, SignMask(4, 4, false)).count_true() == 0);

    // commutative, associative, idempotent
    CHECK(intersect(a, b) == intersect(b, a));
    SignMask c(4, 4);
    for (auto& v : c.data) v = rng() % 2;
    CHECK(intersect(intersect(a, b), c) == intersect(a, intersect(b, c)));
    CHECK(intersect(a, a) == a);
}

TEST_CASE("intersect rejects dimension mismatches") {
    CHECK_THROWS_AS(intersect(SignMask(4, 4), SignMask(5, 4)), std::invalid_argument);
}
