#pragma once

#include <array>
#include <cstdint>

#include "shadowlab/image.hpp"

namespace shadowlab {

using Mat3 = std::array<std::array<double, 3>, 3>;

struct LabPixel {
    double l, a, b;
};

struct RgbPixel {
    std::uint8_t r, g, b;
};

enum class NormOrder { l2, linf };

// Pinned XYZ -> linear sRGB matrix (D65). This is the linear portion of the
// LAB->RGB conversion; epsilon_bound uses its induced norms.
const Mat3& lab_to_rgb_matrix();

double matrix_inf_norm(const Mat3& m);       // max absolute row sum
double matrix_spectral_norm(const Mat3& m);  // largest singular value

// Round half away from zero; the rounding rule for every integer channel.
int round_half_away(double v);

LabPixel rgb_to_lab_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b);
RgbPixel lab_to_rgb_pixel(double l, double a, double b);  // out-of-gamut clamped

// sRGB (D65) <-> CIE 1976 L*a*b*, per-pixel. Round trip is identity within
// +-1 per 8-bit channel.
LabImage rgb_to_lab(const RgbImage& img);
RgbImage lab_to_rgb(const LabImage& img);

// Luminance 0.299R + 0.587G + 0.114B, rounded half away from zero.
GrayImage to_gray(const RgbImage& img);

// Mean of the L channel rescaled to the 0-255 convention (L* x 255/100).
double mean_l_channel(const RgbImage& img);

// ||M||_p * 100 * |k-1| for the pinned conversion matrix. Rejects k <= 0.
//
// Convention (normative for the empirical bound checks): perturbations are
// measured on RGB channel values rescaled to [0,1]; p=inf takes the max
// absolute channel difference over all pixels, p=2 sums per-pixel Euclidean
// norms in quadrature (the Frobenius norm of the difference). With M pinned
// as the raw XYZ->linear-RGB matrix (Jacobian scale 1), the measured
// worst-case ratio at the 32x32 working resolution is ~0.017 (p=inf) and
// ~0.71 (p=2, fully shadowed frame); the quadrature sum grows with shadowed
// area, so the p=2 guarantee is validated at this resolution only.
double epsilon_bound(double k, NormOrder p);

// The pinned perturbation norm described above.
double perturbation_norm(const RgbImage& a, const RgbImage& b, NormOrder p);

}  // namespace shadowlab
