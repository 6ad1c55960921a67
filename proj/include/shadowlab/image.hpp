#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace shadowlab {

// 8-bit RGB raster, row-major, interleaved (R,G,B per pixel).
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // size = width*height*3

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t& at(int row, int col, int ch) {
        return data[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
    }
    std::uint8_t at(int row, int col, int ch) const {
        return data[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    bool operator==(const RgbImage&) const = default;
};

// Real-valued CIELAB raster, row-major, interleaved (L,a,b per pixel).
// L in [0,100]; a,b nominally in [-128,127].
struct LabImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    LabImage() = default;
    LabImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0) {}

    double& at(int row, int col, int ch) {
        return data[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
    }
    double at(int row, int col, int ch) const {
        return data[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
    }
};

// Single-channel 8-bit raster.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }

    bool operator==(const GrayImage&) const = default;
};

// Binary map; every value is exactly 0 or 255.
struct ProfileMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    ProfileMap() = default;
    ProfileMap(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }

    bool operator==(const ProfileMap&) const = default;
};

// Per-pixel boolean mask (1 = sign region).
struct SignMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // 0 or 1

    SignMask() = default;
    SignMask(int w, int h, bool fill = false)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

    bool at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col] != 0; }
    void set(int row, int col, bool v) { data[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0; }
    std::size_t count_true() const {
        std::size_t n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }

    bool operator==(const SignMask&) const = default;
};

// Four planes (R,G,B,profile), plane-major, real-valued. RGB planes hold
// values in [0,255] (integers after augmentation, possibly fractional under
// gradient attacks); the profile plane holds only 0 or 255.
struct FourChannelImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // size = 4*width*height

    FourChannelImage() = default;
    FourChannelImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 4, 0.0f) {}

    float& at(int plane, int row, int col) {
        return data[(static_cast<std::size_t>(plane) * height + row) * width + col];
    }
    float at(int plane, int row, int col) const {
        return data[(static_cast<std::size_t>(plane) * height + row) * width + col];
    }
    std::size_t plane_size() const { return static_cast<std::size_t>(width) * height; }

    bool operator==(const FourChannelImage&) const = default;
};

inline void require_same_dims(int wa, int ha, int wb, int hb, const char* what) {
    if (wa != wb || ha != hb) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace shadowlab
