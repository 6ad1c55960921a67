#include "shadowlab/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <png.h>

#include "shadowlab/color.hpp"

namespace shadowlab {

namespace {

std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

int read_pnm_token(std::istream& is, const std::string& path) {
    // skips whitespace and '#' comments
    while (true) {
        int c = is.peek();
        if (c == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(c)) {
            is.get();
        } else {
            break;
        }
    }
    int v;
    if (!(is >> v)) fail(path, "malformed PNM header");
    return v;
}

struct PnmHeader {
    int width, height, maxval;
};

PnmHeader read_pnm_header(std::istream& is, const std::string& path, const char* magic) {
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != magic[0] || m1 != magic[1]) fail(path, std::string("expected ") + magic + " header");
    PnmHeader h;
    h.width = read_pnm_token(is, path);
    h.height = read_pnm_token(is, path);
    h.maxval = read_pnm_token(is, path);
    if (h.width <= 0 || h.height <= 0 || h.maxval != 255) fail(path, "unsupported PNM geometry");
    is.get();  // single whitespace before raster
    return h;
}

// ---- PNG via libpng ----

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void load_png_any(const std::string& path, int& width, int& height, int& channels,
                  std::vector<std::uint8_t>& out) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) fail(path, "cannot open file");
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = png_create_info_struct(r.png);
    if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng decode error");
    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    png_set_strip_16(r.png);
    png_set_packing(r.png);
    if (png_get_color_type(r.png, r.info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (png_get_color_type(r.png, r.info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(r.png, r.info) < 8)
        png_set_expand_gray_1_2_4_to_8(r.png);
    png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);

    width = static_cast<int>(png_get_image_width(r.png, r.info));
    height = static_cast<int>(png_get_image_height(r.png, r.info));
    channels = static_cast<int>(png_get_channels(r.png, r.info));
    if (channels != 1 && channels != 3) fail(path, "unsupported PNG channel count");

    out.resize(static_cast<std::size_t>(width) * height * channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] = out.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
}

void save_png_any(const std::string& path, int width, int height, int channels,
                  const std::uint8_t* data) {
    PngWriter w;
    w.fp = std::fopen(path.c_str(), "wb");
    if (!w.fp) fail(path, "cannot open file for writing");
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (setjmp(png_jmpbuf(w.png))) fail(path, "libpng encode error");
    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width * channels);
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

}  // namespace

RgbImage load_rgb(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        int w, h, ch;
        std::vector<std::uint8_t> raw;
        load_png_any(path, w, h, ch, raw);
        RgbImage img(w, h);
        if (ch == 3) {
            img.data = std::move(raw);
        } else {
            for (std::size_t i = 0; i < img.pixel_count(); ++i)
                img.data[i * 3] = img.data[i * 3 + 1] = img.data[i * 3 + 2] = raw[i];
        }
        return img;
    }
    if (ext == "ppm") {
        std::ifstream is(path, std::ios::binary);
        if (!is) fail(path, "cannot open file");
        PnmHeader h = read_pnm_header(is, path, "P6");
        RgbImage img(h.width, h.height);
        is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
        if (!is) fail(path, "truncated PPM raster");
        return img;
    }
    fail(path, "unsupported image extension for RGB load");
}

GrayImage load_gray(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        int w, h, ch;
        std::vector<std::uint8_t> raw;
        load_png_any(path, w, h, ch, raw);
        GrayImage img(w, h);
        if (ch == 1) {
            img.data = std::move(raw);
        } else {
            for (std::size_t i = 0; i < img.data.size(); ++i) {
                double y = 0.299 * raw[i * 3] + 0.587 * raw[i * 3 + 1] + 0.114 * raw[i * 3 + 2];
                img.data[i] = static_cast<std::uint8_t>(std::clamp(round_half_away(y), 0, 255));
            }
        }
        return img;
    }
    if (ext == "pgm") {
        std::ifstream is(path, std::ios::binary);
        if (!is) fail(path, "cannot open file");
        PnmHeader h = read_pnm_header(is, path, "P5");
        GrayImage img(h.width, h.height);
        is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
        if (!is) fail(path, "truncated PGM raster");
        return img;
    }
    fail(path, "unsupported image extension for gray load");
}

void save_rgb(const std::string& path, const RgbImage& img) {
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        save_png_any(path, img.width, img.height, 3, img.data.data());
        return;
    }
    if (ext == "ppm") {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) fail(path, "cannot open file for writing");
        os << "P6\n" << img.width << " " << img.height << "\n255\n";
        os.write(reinterpret_cast<const char*>(img.data.data()),
                 static_cast<std::streamsize>(img.data.size()));
        if (!os) fail(path, "write failed");
        return;
    }
    fail(path, "unsupported image extension for RGB save");
}

void save_gray(const std::string& path, const GrayImage& img) {
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        save_png_any(path, img.width, img.height, 1, img.data.data());
        return;
    }
    if (ext == "pgm") {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) fail(path, "cannot open file for writing");
        os << "P5\n" << img.width << " " << img.height << "\n255\n";
        os.write(reinterpret_cast<const char*>(img.data.data()),
                 static_cast<std::streamsize>(img.data.size()));
        if (!os) fail(path, "write failed");
        return;
    }
    fail(path, "unsupported image extension for gray save");
}

RgbImage resize_bilinear(const RgbImage& img, int width, int height) {
    RgbImage out(width, height);
    const double sx = static_cast<double>(img.width) / width;
    const double sy = static_cast<double>(img.height) / height;
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            // pixel-center mapping
            const double fx = std::clamp((col + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
            const double fy = std::clamp((row + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
            const int x0 = static_cast<int>(std::floor(fx));
            const int y0 = static_cast<int>(std::floor(fy));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const int y1 = std::min(y0 + 1, img.height - 1);
            const double ax = fx - x0;
            const double ay = fy - y0;
            for (int ch = 0; ch < 3; ++ch) {
                const double v =
                    (1 - ay) * ((1 - ax) * img.at(y0, x0, ch) + ax * img.at(y0, x1, ch)) +
                    ay * ((1 - ax) * img.at(y1, x0, ch) + ax * img.at(y1, x1, ch));
                out.at(row, col, ch) = static_cast<std::uint8_t>(std::clamp(round_half_away(v), 0, 255));
            }
        }
    }
    return out;
}

GrayImage resize_nearest(const GrayImage& img, int width, int height) {
    GrayImage out(width, height);
    const double sx = static_cast<double>(img.width) / width;
    const double sy = static_cast<double>(img.height) / height;
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            const int x = std::min(static_cast<int>((col + 0.5) * sx), img.width - 1);
            const int y = std::min(static_cast<int>((row + 0.5) * sy), img.height - 1);
            out.at(row, col) = img.at(y, x);
        }
    }
    return out;
}

}  // namespace shadowlab
