#include "shadowlab/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shadowlab/color.hpp"
#include "shadowlab/rng.hpp"

namespace shadowlab {

RgbImage apply_shadow(const RgbImage& img, const ShadowParams& params, const SignMask& mask) {
    require_same_dims(img.width, img.height, mask.width, mask.height, "apply_shadow");
    if (params.k <= 0.0 || params.k > 1.0)
        throw std::invalid_argument("apply_shadow: k must be in (0,1]");

    RgbImage out = img;
    if (params.k == 1.0) return out;

    SignMask region = intersect(rasterize(params.polygon, img.width, img.height), mask);
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        if (region.data[i] == 0) continue;
        LabPixel lab = rgb_to_lab_pixel(img.data[i * 3], img.data[i * 3 + 1], img.data[i * 3 + 2]);
        RgbPixel p = lab_to_rgb_pixel(lab.l * params.k, lab.a, lab.b);
        out.data[i * 3] = p.r;
        out.data[i * 3 + 1] = p.g;
        out.data[i * 3 + 2] = p.b;
    }
    return out;
}

namespace {

Polygon polygon_from_coords(const std::vector<double>& x, int vertex_count) {
    Polygon poly;
    poly.vertices.resize(vertex_count);
    for (int v = 0; v < vertex_count; ++v) {
        poly.vertices[v] = Point{x[2 * v], x[2 * v + 1]};
    }
    return poly;
}

}  // namespace

AttackResult pso_attack(const RgbImage& img, int label, QueryingClassifier& model, double k,
                        const SignMask& mask, const PsoConfig& cfg) {
    if (cfg.particles < 1 || cfg.iterations < 1)
        throw std::invalid_argument("pso_attack: particles and iterations must be >= 1");
    if (k <= 0.0 || k > 1.0) throw std::invalid_argument("pso_attack: k must be in (0,1]");

    const Bounds bounds = cfg.bounds_for(img.width, img.height);
    const int dims = 2 * cfg.vertex_count;
    const double v_max_x = 0.25 * (bounds.x_max - bounds.x_min);
    const double v_max_y = 0.25 * (bounds.y_max - bounds.y_min);

    std::mt19937 rng = make_rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const long queries_before = model.query_count();

    auto coord_lo = [&](int d) { return d % 2 == 0 ? bounds.x_min : bounds.y_min; };
    auto coord_hi = [&](int d) { return d % 2 == 0 ? bounds.x_max : bounds.y_max; };
    auto v_max = [&](int d) { return d % 2 == 0 ? v_max_x : v_max_y; };

    struct Eval {
        double fitness;
        int argmax;
    };
    auto evaluate = [&](const std::vector<double>& x) -> Eval {
        Polygon poly = polygon_from_coords(x, cfg.vertex_count);
        RgbImage shadowed = apply_shadow(img, ShadowParams{k, poly}, mask);
        std::vector<double> probs = model.predict(shadowed);
        int argmax = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        return Eval{probs[static_cast<std::size_t>(label)], argmax};
    };

    std::vector<std::vector<double>> pos(cfg.particles, std::vector<double>(dims));
    std::vector<std::vector<double>> vel(cfg.particles, std::vector<double>(dims, 0.0));
    std::vector<std::vector<double>> pbest_pos(cfg.particles);
    std::vector<double> pbest_fit(cfg.particles);
    std::vector<double> gbest_pos;
    double gbest_fit = 2.0;
    int gbest_argmax = -1;

    AttackResult result;
    auto finish = [&](bool success, const std::vector<double>& x, double fit, int argmax) {
        result.success = success;
        result.best_polygon = polygon_from_coords(x, cfg.vertex_count);
        result.queries = model.query_count() - queries_before;
        result.final_confidence = fit;
        result.predicted_label = argmax;
        return result;
    };

    for (int p = 0; p < cfg.particles; ++p) {
        for (int d = 0; d < dims; ++d) pos[p][d] = coord_lo(d) + unit(rng) * (coord_hi(d) - coord_lo(d));
        Eval e = evaluate(pos[p]);
        if (e.argmax != label) return finish(true, pos[p], e.fitness, e.argmax);
        pbest_pos[p] = pos[p];
        pbest_fit[p] = e.fitness;
        if (e.fitness < gbest_fit) {
            gbest_fit = e.fitness;
            gbest_pos = pos[p];
            gbest_argmax = e.argmax;
        }
    }

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        for (int p = 0; p < cfg.particles; ++p) {
            for (int d = 0; d < dims; ++d) {
                const double r1 = unit(rng);
                const double r2 = unit(rng);
                double v = cfg.inertia * vel[p][d] + cfg.cognitive * r1 * (pbest_pos[p][d] - pos[p][d]) +
                           cfg.social * r2 * (gbest_pos[d] - pos[p][d]);
                v = std::clamp(v, -v_max(d), v_max(d));
                vel[p][d] = v;
                pos[p][d] = std::clamp(pos[p][d] + v, coord_lo(d), coord_hi(d));
            }
            Eval e = evaluate(pos[p]);
            if (e.argmax != label) return finish(true, pos[p], e.fitness, e.argmax);
            if (e.fitness < pbest_fit[p]) {
                pbest_fit[p] = e.fitness;
                pbest_pos[p] = pos[p];
            }
            if (e.fitness < gbest_fit) {
                gbest_fit = e.fitness;
                gbest_pos = pos[p];
                gbest_argmax = e.argmax;
            }
        }
    }

    return finish(false, gbest_pos, gbest_fit, gbest_argmax);
}

}  // namespace shadowlab
