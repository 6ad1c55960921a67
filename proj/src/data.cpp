#include "shadowlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "shadowlab/color.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/image_io.hpp"
#include "shadowlab/rng.hpp"

namespace fs = std::filesystem;

namespace shadowlab {

namespace {

// 5x7 glyph rows, MSB-first in the low 5 bits.
struct Glyph {
    std::uint8_t rows[7];
};

// glyph pair chosen so neither can be forged from the other by darkening
// alone: the ring's light interior cannot be produced by adding shadow, and
// ink strokes stay dark under any shadow
constexpr Glyph kGlyphOne = {{0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}};
constexpr Glyph kGlyphZero = {{0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}};

enum class Shape { circle, triangle, octagon, square };

Polygon shape_polygon(Shape shape, double cx, double cy, double r, double rot) {
    int sides = 0;
    double start = 0.0;
    switch (shape) {
        case Shape::triangle:
            sides = 3;
            start = -90.0;
            break;
        case Shape::octagon:
            sides = 8;
            start = 22.5;
            break;
        case Shape::square:
            sides = 4;
            start = 45.0;
            break;
        case Shape::circle:
            break;
    }
    Polygon poly;
    for (int i = 0; i < sides; ++i) {
        double ang = (start + rot + i * 360.0 / sides) * std::numbers::pi / 180.0;
        poly.vertices.push_back(Point{cx + r * std::cos(ang), cy + r * std::sin(ang)});
    }
    return poly;
}

SignMask shape_mask(Shape shape, double cx, double cy, double r, double rot, int size) {
    if (shape == Shape::circle) {
        SignMask mask(size, size, false);
        for (int row = 0; row < size; ++row)
            for (int col = 0; col < size; ++col) {
                double dx = col + 0.5 - cx, dy = row + 0.5 - cy;
                mask.set(row, col, dx * dx + dy * dy <= r * r);
            }
        return mask;
    }
    return rasterize(shape_polygon(shape, cx, cy, r, rot), size, size);
}

std::uint8_t jitter_channel(std::mt19937& rng, int base, int spread) {
    int v = base + static_cast<int>(rng() % (2 * spread + 1)) - spread;
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

Sample render_sample(int label, int index, std::uint64_t seed) {
    const int size = kCanonicalSize;
    std::mt19937 rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(label),
                                         static_cast<std::uint64_t>(index)));

    const Shape shape = static_cast<Shape>(label % 4);
    const Glyph& glyph = (label / 4 == 0) ? kGlyphOne : kGlyphZero;

    const double cx = size / 2.0 + uniform_in(rng, -1.5, 1.5);
    const double cy = size / 2.0 + uniform_in(rng, -1.5, 1.5);
    const double r = uniform_in(rng, 11.5, 13.5);
    const double rot = uniform_in(rng, -10.0, 10.0);

    std::uint8_t bg[3], fill[3], border[3], ink[3];
    for (int c = 0; c < 3; ++c) bg[c] = jitter_channel(rng, 150, 35);
    for (int c = 0; c < 3; ++c) fill[c] = jitter_channel(rng, 225, 22);
    for (int c = 0; c < 3; ++c) border[c] = jitter_channel(rng, 45, 20);
    for (int c = 0; c < 3; ++c) ink[c] = jitter_channel(rng, 25, 15);
    // global illumination varies per sample; absolute color is unreliable,
    // local contrast is the stable signal
    const double illum = uniform_in(rng, 0.65, 1.05);

    // border-ring width is part of the shape identity (the octagon carries a
    // stop-sign-style fat ring, the circle a thin one)
    double ring = 2.5;
    if (shape == Shape::circle) ring = 1.6;
    if (shape == Shape::octagon) ring = 5.0;
    SignMask outer = shape_mask(shape, cx, cy, r, rot, size);
    SignMask inner = shape_mask(shape, cx, cy, r - ring, rot, size);

    Sample s;
    s.label = label;
    s.mask = outer;
    s.image = RgbImage(size, size);
    {
        std::ostringstream id;
        id << "c" << label << "_s" << index;
        s.id = id.str();
    }

    // glyph box: 5x7 cells scaled by 2, centered on the sign
    const int gw = 10, gh = 14;
    const int gx0 = static_cast<int>(std::lround(cx)) - gw / 2;
    const int gy0 = static_cast<int>(std::lround(cy)) - gh / 2;

    for (int row = 0; row < size; ++row) {
        for (int col = 0; col < size; ++col) {
            const std::uint8_t* color = bg;
            if (inner.at(row, col)) {
                color = fill;
                if (col >= gx0 && col < gx0 + gw && row >= gy0 && row < gy0 + gh) {
                    int cellx = (col - gx0) / 2;
                    int celly = (row - gy0) / 2;
                    if (glyph.rows[celly] & (1 << (4 - cellx))) color = ink;
                }
            } else if (outer.at(row, col)) {
                color = border;
            }
            for (int c = 0; c < 3; ++c) {
                const double v = static_cast<int>(color[c]) * illum;
                s.image.at(row, col, c) =
                    static_cast<std::uint8_t>(std::clamp(round_half_away(v), 0, 255));
            }
        }
    }
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

DatasetSplit generate_synthetic(const SyntheticSpec& spec) {
    if (spec.class_count < 2 || spec.class_count > 8)
        throw std::invalid_argument("generate_synthetic: class_count must be in [2,8]");
    if (spec.per_class < 1) throw std::invalid_argument("generate_synthetic: per_class must be >= 1");
    DatasetSplit out;
    const int train_per_class = spec.per_class * 4 / 5;
    for (int label = 0; label < spec.class_count; ++label) {
        for (int i = 0; i < spec.per_class; ++i) {
            Sample s = render_sample(label, i, spec.seed);
            (i < train_per_class ? out.train : out.test).push_back(std::move(s));
        }
    }
    return out;
}

DatasetSplit load_dataset(const std::string& root, const std::string& manifest) {
    const fs::path manifest_path = fs::path(root) / manifest;
    std::ifstream is(manifest_path);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + manifest_path.string());

    DatasetSplit out;
    std::string line;
    int row_number = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++row_number;
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        if (!header_seen) {
            if (f.size() != 5 || f[0] != "id" || f[1] != "relative_path" || f[2] != "label" ||
                f[3] != "mask_path" || f[4] != "split")
                throw std::runtime_error("load_dataset: bad manifest header in " +
                                         manifest_path.string());
            header_seen = true;
            continue;
        }
        auto row_error = [&](const std::string& what) {
            throw std::runtime_error("load_dataset: row " + std::to_string(row_number) + ": " + what);
        };
        if (f.size() != 5) row_error("expected 5 fields, got " + std::to_string(f.size()));

        Sample s;
        s.id = f[0];
        if (s.id.empty()) row_error("empty id");
        int label = 0;
        try {
            std::size_t pos = 0;
            label = std::stoi(f[2], &pos);
            if (pos != f[2].size()) row_error("non-integer label '" + f[2] + "'");
        } catch (const std::exception&) {
            row_error("non-integer label '" + f[2] + "'");
        }
        if (label < 0) row_error("negative label");
        s.label = label;
        if (f[4] != "train" && f[4] != "test") row_error("split must be train or test");

        RgbImage raw = load_rgb((fs::path(root) / f[1]).string());
        s.image = (raw.width == kCanonicalSize && raw.height == kCanonicalSize)
                      ? raw
                      : resize_bilinear(raw, kCanonicalSize, kCanonicalSize);

        if (!f[3].empty()) {
            GrayImage m = load_gray((fs::path(root) / f[3]).string());
            if (m.width != kCanonicalSize || m.height != kCanonicalSize)
                m = resize_nearest(m, kCanonicalSize, kCanonicalSize);
            s.mask = SignMask(kCanonicalSize, kCanonicalSize, false);
            for (std::size_t i = 0; i < m.data.size(); ++i) s.mask.data[i] = m.data[i] != 0 ? 1 : 0;
        } else {
            s.mask = SignMask(kCanonicalSize, kCanonicalSize, true);
        }
        (f[4] == "train" ? out.train : out.test).push_back(std::move(s));
    }
    if (!header_seen) throw std::runtime_error("load_dataset: empty manifest " + manifest_path.string());
    return out;
}

void write_dataset(const DatasetSplit& ds, const std::string& dir, const std::string& image_format) {
    if (image_format != "ppm" && image_format != "png")
        throw std::invalid_argument("write_dataset: image_format must be ppm or png");
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "masks");
    std::ofstream manifest(fs::path(dir) / "manifest.csv", std::ios::trunc);
    if (!manifest) throw std::runtime_error("write_dataset: cannot write manifest in " + dir);
    manifest << "id,relative_path,label,mask_path,split\n";

    auto emit = [&](const Sample& s, const char* split) {
        const std::string img_rel = "images/" + s.id + "." + image_format;
        const std::string mask_rel = "masks/" + s.id + ".png";
        save_rgb((fs::path(dir) / img_rel).string(), s.image);
        GrayImage m(s.mask.width, s.mask.height);
        for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = s.mask.data[i] ? 255 : 0;
        save_gray((fs::path(dir) / mask_rel).string(), m);
        manifest << s.id << "," << img_rel << "," << s.label << "," << mask_rel << "," << split
                 << "\n";
    };
    for (const Sample& s : ds.train) emit(s, "train");
    for (const Sample& s : ds.test) emit(s, "test");
}

}  // namespace shadowlab
