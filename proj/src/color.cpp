#include "shadowlab/color.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shadowlab {

namespace {

// sRGB <-> XYZ (D65)
constexpr Mat3 kRgbToXyz = {{{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}}};

constexpr Mat3 kXyzToRgb = {{{3.2404542, -1.5371385, -0.4985314},
                             {-0.9692660, 1.8760108, 0.0415560},
                             {0.0556434, -0.2040259, 1.0572252}}};

constexpr double kXn = 0.95047;
constexpr double kYn = 1.00000;
constexpr double kZn = 1.08883;

constexpr double kDelta = 6.0 / 29.0;

double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
    return c <= 0.0031308 ? c * 12.92 : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

// CIE 1976 two-piece f(t) and its inverse.
double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(round_half_away(v), 0, 255));
}

}  // namespace

const Mat3& lab_to_rgb_matrix() { return kXyzToRgb; }

double matrix_inf_norm(const Mat3& m) {
    double best = 0.0;
    for (const auto& row : m) {
        double s = std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]);
        best = std::max(best, s);
    }
    return best;
}

double matrix_spectral_norm(const Mat3& m) {
    // Power iteration on M^T M; 3x3, deterministic start.
    std::array<double, 3> v = {1.0, 1.0, 1.0};
    for (int iter = 0; iter < 200; ++iter) {
        std::array<double, 3> mv = {0, 0, 0};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mv[i] += m[i][j] * v[j];
        std::array<double, 3> mtmv = {0, 0, 0};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mtmv[j] += m[i][j] * mv[i];
        double n = std::sqrt(mtmv[0] * mtmv[0] + mtmv[1] * mtmv[1] + mtmv[2] * mtmv[2]);
        for (int j = 0; j < 3; ++j) v[j] = mtmv[j] / n;
    }
    std::array<double, 3> mv = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mv[i] += m[i][j] * v[j];
    return std::sqrt(mv[0] * mv[0] + mv[1] * mv[1] + mv[2] * mv[2]);
}

int round_half_away(double v) {
    return static_cast<int>(v < 0 ? std::ceil(v - 0.5) : std::floor(v + 0.5));
}

LabPixel rgb_to_lab_pixel(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    double r = srgb_to_linear(r8 / 255.0);
    double g = srgb_to_linear(g8 / 255.0);
    double b = srgb_to_linear(b8 / 255.0);

    double x = kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b;
    double y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
    double z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;

    double fx = lab_f(x / kXn);
    double fy = lab_f(y / kYn);
    double fz = lab_f(z / kZn);

    LabPixel out;
    out.l = std::clamp(116.0 * fy - 16.0, 0.0, 100.0);
    out.a = 500.0 * (fx - fy);
    out.b = 200.0 * (fy - fz);
    return out;
}

RgbPixel lab_to_rgb_pixel(double l, double a, double b) {
    double fy = (l + 16.0) / 116.0;
    double fx = fy + a / 500.0;
    double fz = fy - b / 200.0;

    double x = kXn * lab_f_inv(fx);
    double y = kYn * lab_f_inv(fy);
    double z = kZn * lab_f_inv(fz);

    double rl = kXyzToRgb[0][0] * x + kXyzToRgb[0][1] * y + kXyzToRgb[0][2] * z;
    double gl = kXyzToRgb[1][0] * x + kXyzToRgb[1][1] * y + kXyzToRgb[1][2] * z;
    double bl = kXyzToRgb[2][0] * x + kXyzToRgb[2][1] * y + kXyzToRgb[2][2] * z;

    RgbPixel out;
    out.r = clamp_u8(linear_to_srgb(std::clamp(rl, 0.0, 1.0)) * 255.0);
    out.g = clamp_u8(linear_to_srgb(std::clamp(gl, 0.0, 1.0)) * 255.0);
    out.b = clamp_u8(linear_to_srgb(std::clamp(bl, 0.0, 1.0)) * 255.0);
    return out;
}

LabImage rgb_to_lab(const RgbImage& img) {
    LabImage out(img.width, img.height);
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        LabPixel p = rgb_to_lab_pixel(img.data[i * 3], img.data[i * 3 + 1], img.data[i * 3 + 2]);
        out.data[i * 3] = p.l;
        out.data[i * 3 + 1] = p.a;
        out.data[i * 3 + 2] = p.b;
    }
    return out;
}

RgbImage lab_to_rgb(const LabImage& img) {
    RgbImage out(img.width, img.height);
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        RgbPixel p = lab_to_rgb_pixel(img.data[i * 3], img.data[i * 3 + 1], img.data[i * 3 + 2]);
        out.data[i * 3] = p.r;
        out.data[i * 3 + 1] = p.g;
        out.data[i * 3 + 2] = p.b;
    }
    return out;
}

GrayImage to_gray(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.299 * img.data[i * 3] + 0.587 * img.data[i * 3 + 1] + 0.114 * img.data[i * 3 + 2];
        out.data[i] = static_cast<std::uint8_t>(std::clamp(round_half_away(y), 0, 255));
    }
    return out;
}

double mean_l_channel(const RgbImage& img) {
    const std::size_t n = img.pixel_count();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += rgb_to_lab_pixel(img.data[i * 3], img.data[i * 3 + 1], img.data[i * 3 + 2]).l;
    }
    return sum / static_cast<double>(n) * 255.0 / 100.0;
}

double epsilon_bound(double k, NormOrder p) {
    if (k <= 0.0) throw std::invalid_argument("epsilon_bound: k must be positive");
    double norm = p == NormOrder::linf ? matrix_inf_norm(lab_to_rgb_matrix())
                                       : matrix_spectral_norm(lab_to_rgb_matrix());
    return norm * 100.0 * std::abs(k - 1.0);
}

double perturbation_norm(const RgbImage& a, const RgbImage& b, NormOrder p) {
    require_same_dims(a.width, a.height, b.width, b.height, "perturbation_norm");
    const std::size_t n = a.pixel_count();
    if (p == NormOrder::linf) {
        double best = 0.0;
        for (std::size_t i = 0; i < n * 3; ++i) {
            best = std::max(best, std::abs(a.data[i] / 255.0 - b.data[i] / 255.0));
        }
        return best;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n * 3; ++i) {
        double d = a.data[i] / 255.0 - b.data[i] / 255.0;
        sum += d * d;
    }
    return std::sqrt(sum);
}

}  // namespace shadowlab
