#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace synthact {

// Row-major raster with 3 (RGB) or 4 (RGBA, premultiplied) channels, values
// in [0, 1]. PNG IO quantizes with round(v * 255).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, 0.0) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool channels_in_range(double tol = 0.0) const;
};

// Reads an 8-bit PNG; grayscale/palette images are expanded to RGB. The
// channel count of the result is 3 or 4 depending on the file.
Image read_png(const std::filesystem::path& path);

// Writes an 8-bit PNG (RGB or RGBA depending on image.channels).
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace synthact
