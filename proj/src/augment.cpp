#include "shadowlab/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shadowlab/color.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/rng.hpp"
#include "shadowlab/shadow.hpp"

namespace shadowlab {

namespace {

Polygon random_triangle(std::mt19937& rng, int width, int height, double margin) {
    Polygon poly;
    poly.vertices.resize(3);
    for (auto& v : poly.vertices) {
        v.x = uniform_in(rng, -margin * width, (1.0 + margin) * width);
        v.y = uniform_in(rng, -margin * height, (1.0 + margin) * height);
    }
    return poly;
}

struct Affine {
    // forward 2x2 linear part + translation, about the image center
    double a, b, c, d, tx, ty;
};

Affine sample_affine(std::mt19937& rng, const TransformRanges& ranges, int width, int height) {
    const double theta =
        uniform_in(rng, -ranges.rotation_deg, ranges.rotation_deg) * std::numbers::pi / 180.0;
    const double sh = uniform_in(rng, -ranges.shear, ranges.shear);
    const double tx = uniform_in(rng, -ranges.translate_frac, ranges.translate_frac) * width;
    const double ty = uniform_in(rng, -ranges.translate_frac, ranges.translate_frac) * height;
    // M = R(theta) * Shear(sh):  R = [ct -st; st ct], S = [1 sh; 0 1]
    const double ct = std::cos(theta), st = std::sin(theta);
    Affine m;
    m.a = ct;
    m.b = ct * sh - st;
    m.c = st;
    m.d = st * sh + ct;
    m.tx = tx;
    m.ty = ty;
    return m;
}

// Inverse-map an output pixel center to source coordinates.
inline void invert_map(const Affine& m, double cx, double cy, double ox, double oy, double& sx,
                       double& sy) {
    const double det = m.a * m.d - m.b * m.c;
    const double rx = ox - cx - m.tx;
    const double ry = oy - cy - m.ty;
    sx = (m.d * rx - m.b * ry) / det + cx;
    sy = (-m.c * rx + m.a * ry) / det + cy;
}

RgbImage apply_affine_rgb(const RgbImage& img, const Affine& m) {
    // inverse-map with bilinear sampling; out-of-frame fills black
    RgbImage out(img.width, img.height);
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    for (int row = 0; row < img.height; ++row) {
        for (int col = 0; col < img.width; ++col) {
            double sx, sy;
            invert_map(m, cx, cy, col, row, sx, sy);
            if (sx < 0.0 || sy < 0.0 || sx > img.width - 1 || sy > img.height - 1) continue;
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const int y1 = std::min(y0 + 1, img.height - 1);
            const double fx = sx - x0;
            const double fy = sy - y0;
            for (int ch = 0; ch < 3; ++ch) {
                const double v =
                    (1 - fy) * ((1 - fx) * img.at(y0, x0, ch) + fx * img.at(y0, x1, ch)) +
                    fy * ((1 - fx) * img.at(y1, x0, ch) + fx * img.at(y1, x1, ch));
                out.at(row, col, ch) =
                    static_cast<std::uint8_t>(std::clamp(round_half_away(v), 0, 255));
            }
        }
    }
    return out;
}

}  // namespace

FourChannelImage make_example(const RgbImage& img, const SignMask& mask, const AugmentConfig& cfg,
                              std::mt19937& rng) {
    RgbImage rgb = img;
    if (cfg.adv) {
        const double k = uniform_in(rng, cfg.k_min, cfg.k_max);
        Polygon poly = random_triangle(rng, img.width, img.height, cfg.polygon_margin);
        rgb = apply_shadow(img, ShadowParams{k, poly}, mask);
    }
    if (cfg.transform) {
        Affine m = sample_affine(rng, cfg.ranges, img.width, img.height);
        rgb = apply_affine_rgb(rgb, m);
    }
    // The profile comes last, from exactly the raster the model will see, so
    // channel 4 always equals the profile of the RGB planes (matching the
    // inference-time recomputation). kind == none (plain RGB / adversarial-
    // training baseline) leaves the fourth plane zero; 3-channel models
    // never read it.
    ProfileMap profile(img.width, img.height);
    if (cfg.profile.kind != ProfileKind::none) profile = make_profile(rgb, cfg.profile);

    FourChannelImage out(img.width, img.height);
    const std::size_t plane = out.plane_size();
    for (std::size_t i = 0; i < plane; ++i) {
        out.data[i] = rgb.data[i * 3];
        out.data[plane + i] = rgb.data[i * 3 + 1];
        out.data[2 * plane + i] = rgb.data[i * 3 + 2];
        out.data[3 * plane + i] = profile.data[i];
    }
    return out;
}

namespace {

AugmentedDataset run_passes(const std::vector<RgbImage>& images,
                            const std::vector<SignMask>& masks, const std::vector<int>& labels,
                            const AugmentConfig& cfg,
                            const std::vector<std::pair<bool, bool>>& passes) {
    if (images.empty()) throw std::invalid_argument("expand_dataset: empty dataset");
    if (images.size() != masks.size() || images.size() != labels.size())
        throw std::invalid_argument("expand_dataset: images/masks/labels size mismatch");
    AugmentedDataset out;
    out.images.reserve(images.size() * passes.size());
    out.labels.reserve(images.size() * passes.size());
    for (std::size_t p = 0; p < passes.size(); ++p) {
        AugmentConfig pass_cfg = cfg;
        pass_cfg.adv = passes[p].first;
        pass_cfg.transform = passes[p].second;
        for (std::size_t i = 0; i < images.size(); ++i) {
            std::mt19937 rng = make_rng(mix_seed(cfg.seed, p, i));
            out.images.push_back(make_example(images[i], masks[i], pass_cfg, rng));
            out.labels.push_back(labels[i]);
        }
    }
    return out;
}

}  // namespace

AugmentedDataset expand_dataset(const std::vector<RgbImage>& images,
                                const std::vector<SignMask>& masks, const std::vector<int>& labels,
                                const AugmentConfig& cfg) {
    std::vector<std::pair<bool, bool>> passes;
    for (bool adv : cfg.adv ? std::vector<bool>{false, true} : std::vector<bool>{false})
        for (bool tr : cfg.transform ? std::vector<bool>{false, true} : std::vector<bool>{false})
            passes.emplace_back(adv, tr);
    return run_passes(images, masks, labels, cfg, passes);
}

AugmentedDataset quadruplicate(const std::vector<RgbImage>& images,
                               const std::vector<SignMask>& masks, const std::vector<int>& labels,
                               const AugmentConfig& cfg) {
    return run_passes(images, masks, labels, cfg,
                      {{false, false}, {false, true}, {true, false}, {true, true}});
}

}  // namespace shadowlab
