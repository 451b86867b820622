#pragma once

#include <array>
#include <cstdint>

#include "retina/image.hpp"

// Contrast enhancement and noise removal ahead of vessel detection and
// feature extraction.

namespace retina {

struct Histogram {
    std::array<std::uint64_t, 256> counts{};
    std::uint64_t total = 0;
};

struct PreprocessConfig {
    int median_kernel = 5;  // odd window side, 1 disables
    bool equalize = true;
    GrayMode gray_mode = GrayMode::Green;
};

Histogram histogram(const GrayImage& img);

// Equalization lookup table: lut[v] = round(255 * (cdf(v) - cdf_min) / (total - cdf_min)),
// cdf_min taken at the lowest occupied bin. Monotone non-decreasing. A single
// occupied bin maps everything to 0.
std::array<std::uint8_t, 256> equalize_lut(const Histogram& hist);

GrayImage histogram_equalize(const GrayImage& img);

// k x k median with edge replication; k must be odd, k = 1 is the identity.
GrayImage median_filter(const GrayImage& img, int k);

// to_gray -> histogram_equalize (optional) -> median_filter
GrayImage preprocess(const ColorImage& img, const PreprocessConfig& cfg);

// Region of valid retina pixels: a disk fitted to the above-threshold area
// (centroid + equivalent radius). The dark surround outside the circular
// field is excluded from downstream statistics via this mask.
BinaryMask fundus_region_mask(const GrayImage& img, std::uint8_t threshold = 20);

}  // namespace retina
