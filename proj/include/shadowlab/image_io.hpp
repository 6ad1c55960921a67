#pragma once

#include <string>

#include "shadowlab/image.hpp"

namespace shadowlab {

// Formats by extension: .ppm (P6) and .png for RGB, .pgm (P5) and .png for
// grayscale. Loading throws on missing or malformed files, naming the file.
RgbImage load_rgb(const std::string& path);
GrayImage load_gray(const std::string& path);
void save_rgb(const std::string& path, const RgbImage& img);
void save_gray(const std::string& path, const GrayImage& img);

RgbImage resize_bilinear(const RgbImage& img, int width, int height);
GrayImage resize_nearest(const GrayImage& img, int width, int height);

}  // namespace shadowlab
