#pragma once

#include <vector>

#include "shadowlab/image.hpp"

namespace shadowlab {

// k x k Gaussian weights, normalized to sum to 1.
struct GaussianWindow {
    int size = 0;
    std::vector<double> weights;  // row-major, size*size

    double at(int i, int j) const { return weights[static_cast<std::size_t>(i) * size + j]; }
};

// G_{i,j} = alpha * exp((-(i-(k-1)/2)^2 - (j-(k-1)/2)^2) / (2 sigma^2)),
// alpha chosen so the weights sum to 1. Rejects even/too-small k and
// non-positive sigma.
GaussianWindow gaussian_window(int k, double sigma);

// Fixed per-window-size sigma used for the threshold window (the
// conventional 0.3*((k-1)/2 - 1) + 0.8 schedule; 0.8 at k=3).
double default_window_sigma(int k);

// Local Gaussian-window threshold map: output 255 iff s > T - bias where T
// is the window-weighted sum around the pixel (edge replication at borders).
ProfileMap adaptive_threshold(const GrayImage& img, int window, double bias = 0.0);

// Real-valued core of the same operator; the s > T comparison is
// homogeneous of degree 1, so rescaling all inputs by c > 0 leaves the map
// unchanged on tie-free inputs.
std::vector<std::uint8_t> adaptive_threshold_real(const std::vector<double>& s, int width, int height,
                                                  int window, double bias = 0.0);

// Canny edges: 5x5 Gaussian blur, Sobel gradients, direction-quantized
// non-maximum suppression, then two-threshold hysteresis (8-connected).
// Rejects t_lo > t_hi.
ProfileMap canny_edges(const GrayImage& img, double sigma_blur, double t_lo, double t_hi);

struct CannyThresholds {
    double t_lo = 0.0;
    double t_hi = 0.0;
};

// t_lo = max(0, mu(1-sigma)), t_hi = min(255, mu(1+sigma)) where mu is the
// median over all channel values of all pixels (lower-middle element for
// even counts). sigma = 0.33 keeps roughly the 2:1 ratio.
CannyThresholds auto_canny_thresholds(const RgbImage& img, double sigma);

enum class ProfileKind { none, adathresh, edges };

struct ProfileConfig {
    ProfileKind kind = ProfileKind::adathresh;
    int window = 3;
    double bias = 0.0;
    double canny_sigma_blur = 1.0;
    double canny_auto_sigma = 0.33;
};

// Profile of an RGB image per the configured kind; the source channel is
// the grayscale of the presented image.
ProfileMap make_profile(const RgbImage& img, const ProfileConfig& cfg);

}  // namespace shadowlab
