#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Raster containers and bit-exact PPM/PGM I/O.
//
// Conventions used everywhere in this library:
//   - row-major storage, (x right, y down), index = y * width + x
//   - 8-bit intensities on the integer path, doubles on the real path

namespace retina {

struct ImageIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// file could not be opened
struct FileOpenError : ImageIoError {
    using ImageIoError::ImageIoError;
};
// header is not a supported P5/P6 raster (or maxval != 255)
struct FormatError : ImageIoError {
    using ImageIoError::ImageIoError;
};
// header promised more pixel bytes than the file contains
struct TruncatedDataError : ImageIoError {
    using ImageIoError::ImageIoError;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct ColorImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    ColorImage() = default;
    ColorImage(int w, int h, Rgb fill = {});

    Rgb& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    const Rgb& at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    bool operator==(const ColorImage&) const = default;
};

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    // clamped access, used by neighborhood filters (edge replication)
    std::uint8_t at_clamped(int x, int y) const;
    bool operator==(const GrayImage&) const = default;
};

// Real-valued raster for vesselness and feature maps.
struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    FloatImage() = default;
    FloatImage(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double at_clamped(int x, int y) const;
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0 or 1

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false);

    bool get(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t count() const;
    bool operator==(const BinaryMask&) const = default;
};

struct Block {
    int x = 0, y = 0, width = 0, height = 0;
    bool operator==(const Block&) const = default;
};

// Non-overlapping tiling of an image; edge blocks may be truncated.
struct BlockGrid {
    int block_width = 0;
    int block_height = 0;
    std::vector<Block> blocks;
};

enum class GrayMode { Green, Luminance };

ColorImage load_ppm(const std::string& path);
void save_ppm(const ColorImage& img, const std::string& path);
GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

// Masks travel as P5 with values {0, 255}; any nonzero byte reads back as set.
BinaryMask load_mask(const std::string& path);
void save_mask(const BinaryMask& mask, const std::string& path);

void split_channels(const ColorImage& img, GrayImage& r, GrayImage& g, GrayImage& b);
ColorImage merge_channels(const GrayImage& r, const GrayImage& g, const GrayImage& b);

// Green copies the green plane; Luminance is round(0.299 r + 0.587 g + 0.114 b).
GrayImage to_gray(const ColorImage& img, GrayMode mode);

// ceil(width/bw) x ceil(height/bh) blocks, raster order, edge blocks clipped
// to the image bounds. Throws std::invalid_argument on zero block dims.
BlockGrid partition_blocks(int width, int height, int block_width, int block_height);

}  // namespace retina
