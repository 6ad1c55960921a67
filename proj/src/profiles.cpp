#include "shadowlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "shadowlab/color.hpp"

namespace shadowlab {

namespace {

inline int clamp_index(int v, int hi) { return std::clamp(v, 0, hi); }

// Edge-replicated sample.
inline double sample_repl(const std::vector<double>& s, int w, int h, int row, int col) {
    return s[static_cast<std::size_t>(clamp_index(row, h - 1)) * w + clamp_index(col, w - 1)];
}

std::vector<double> convolve_replicated(const std::vector<double>& s, int w, int h,
                                        const std::vector<double>& kernel, int k) {
    const int r = k / 2;
    std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            double acc = 0.0;
            for (int a = 0; a < k; ++a) {
                for (int b = 0; b < k; ++b) {
                    acc += kernel[static_cast<std::size_t>(a) * k + b] *
                           sample_repl(s, w, h, row + a - r, col + b - r);
                }
            }
            out[static_cast<std::size_t>(row) * w + col] = acc;
        }
    }
    return out;
}

std::vector<double> to_real(const GrayImage& img) {
    std::vector<double> out(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) out[i] = img.data[i];
    return out;
}

}  // namespace

GaussianWindow gaussian_window(int k, double sigma) {
    if (k < 3 || k % 2 == 0) throw std::invalid_argument("gaussian_window: k must be odd and >= 3");
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_window: sigma must be positive");
    GaussianWindow win;
    win.size = k;
    win.weights.resize(static_cast<std::size_t>(k) * k);
    const double c = (k - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double w = std::exp((-(i - c) * (i - c) - (j - c) * (j - c)) / (2.0 * sigma * sigma));
            win.weights[static_cast<std::size_t>(i) * k + j] = w;
            sum += w;
        }
    }
    for (auto& w : win.weights) w /= sum;
    return win;
}

double default_window_sigma(int k) { return 0.3 * ((k - 1) / 2.0 - 1.0) + 0.8; }

std::vector<std::uint8_t> adaptive_threshold_real(const std::vector<double>& s, int width, int height,
                                                  int window, double bias) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("adaptive_threshold: window must be odd and >= 3");
    if (s.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("adaptive_threshold: size mismatch");
    GaussianWindow win = gaussian_window(window, default_window_sigma(window));
    const int r = window / 2;
    std::vector<std::uint8_t> out(s.size(), 0);
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            double t = 0.0;
            for (int a = 0; a < window; ++a) {
                for (int b = 0; b < window; ++b) {
                    t += win.at(a, b) * sample_repl(s, width, height, row + a - r, col + b - r);
                }
            }
            const double v = s[static_cast<std::size_t>(row) * width + col];
            out[static_cast<std::size_t>(row) * width + col] = v > t - bias ? 255 : 0;
        }
    }
    return out;
}

ProfileMap adaptive_threshold(const GrayImage& img, int window, double bias) {
    ProfileMap map(img.width, img.height);
    map.data = adaptive_threshold_real(to_real(img), img.width, img.height, window, bias);
    return map;
}

ProfileMap canny_edges(const GrayImage& img, double sigma_blur, double t_lo, double t_hi) {
    if (t_lo > t_hi) throw std::invalid_argument("canny_edges: t_lo > t_hi");
    const int w = img.width, h = img.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;

    GaussianWindow blur = gaussian_window(5, sigma_blur);
    std::vector<double> smooth = convolve_replicated(to_real(img), w, h, blur.weights, 5);

    static const std::vector<double> kSobelX = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
    static const std::vector<double> kSobelY = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
    std::vector<double> gx = convolve_replicated(smooth, w, h, kSobelX, 3);
    std::vector<double> gy = convolve_replicated(smooth, w, h, kSobelY, 3);

    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::hypot(gx[i], gy[i]);

    // Non-maximum suppression against the two neighbors along the quantized
    // gradient direction. Ties are broken asymmetrically (strict against the
    // negative-offset neighbor) so plateau edges stay one pixel wide.
    std::vector<double> nms(n, 0.0);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const std::size_t i = static_cast<std::size_t>(row) * w + col;
            double ang = std::atan2(gy[i], gx[i]) * 180.0 / std::numbers::pi;
            if (ang < 0) ang += 180.0;
            int dr, dc;
            if (ang < 22.5 || ang >= 157.5) {
                dr = 0; dc = 1;
            } else if (ang < 67.5) {
                dr = 1; dc = 1;
            } else if (ang < 112.5) {
                dr = 1; dc = 0;
            } else {
                dr = 1; dc = -1;
            }
            auto mag_at = [&](int rr, int cc) -> double {
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) return 0.0;
                return mag[static_cast<std::size_t>(rr) * w + cc];
            };
            const double m = mag[i];
            if (m > mag_at(row - dr, col - dc) && m >= mag_at(row + dr, col + dc)) nms[i] = m;
        }
    }

    // Hysteresis: > t_hi seeds an edge, < t_lo never is, values in between
    // join if 8-connected to an edge (fixed-point flood).
    std::vector<std::uint8_t> state(n, 0);  // 0 = out, 1 = weak, 2 = edge
    for (std::size_t i = 0; i < n; ++i) {
        if (nms[i] > t_hi) state[i] = 2;
        else if (nms[i] >= t_lo && nms[i] > 0.0) state[i] = 1;
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (int row = 0; row < h; ++row) {
            for (int col = 0; col < w; ++col) {
                const std::size_t i = static_cast<std::size_t>(row) * w + col;
                if (state[i] != 1) continue;
                for (int dr = -1; dr <= 1 && state[i] == 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        int rr = row + dr, cc = col + dc;
                        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                        if (state[static_cast<std::size_t>(rr) * w + cc] == 2) {
                            state[i] = 2;
                            changed = true;
                            break;
                        }
                    }
                }
            }
        }
    }

    ProfileMap map(w, h);
    for (std::size_t i = 0; i < n; ++i) map.data[i] = state[i] == 2 ? 255 : 0;
    return map;
}

CannyThresholds auto_canny_thresholds(const RgbImage& img, double sigma) {
    std::vector<std::uint8_t> values(img.data);
    CannyThresholds out;
    if (values.empty()) return out;
    // Lower-middle element for even counts.
    std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double mu = values[mid];
    out.t_lo = std::max(0.0, mu * (1.0 - sigma));
    out.t_hi = std::min(255.0, mu * (1.0 + sigma));
    return out;
}

ProfileMap make_profile(const RgbImage& img, const ProfileConfig& cfg) {
    switch (cfg.kind) {
        case ProfileKind::adathresh:
            return adaptive_threshold(to_gray(img), cfg.window, cfg.bias);
        case ProfileKind::edges: {
            CannyThresholds t = auto_canny_thresholds(img, cfg.canny_auto_sigma);
            return canny_edges(to_gray(img), cfg.canny_sigma_blur, t.t_lo, t.t_hi);
        }
        case ProfileKind::none:
            break;
    }
    throw std::invalid_argument("make_profile: profile kind is none");
}

}  // namespace shadowlab
