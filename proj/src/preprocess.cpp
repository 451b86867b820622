#include "retina/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retina {

Histogram histogram(const GrayImage& img) {
    Histogram h;
    for (std::uint8_t v : img.pixels) ++h.counts[v];
    h.total = img.pixels.size();
    return h;
}

std::array<std::uint8_t, 256> equalize_lut(const Histogram& hist) {
    std::array<std::uint8_t, 256> lut{};
    if (hist.total == 0) return lut;

    std::uint64_t cdf_min = 0;
    for (int v = 0; v < 256; ++v) {
        if (hist.counts[v] > 0) {
            cdf_min = hist.counts[v];
            break;
        }
    }
    const std::uint64_t denom = hist.total - cdf_min;
    std::uint64_t cdf = 0;
    for (int v = 0; v < 256; ++v) {
        cdf += hist.counts[v];
        if (denom == 0) {
            lut[v] = 0;  // single occupied bin
        } else {
            double scaled = 255.0 * static_cast<double>(cdf - std::min(cdf, cdf_min)) /
                            static_cast<double>(denom);
            lut[v] = static_cast<std::uint8_t>(std::lround(std::min(scaled, 255.0)));
        }
    }
    return lut;
}

GrayImage histogram_equalize(const GrayImage& img) {
    std::array<std::uint8_t, 256> lut = equalize_lut(histogram(img));
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = lut[img.pixels[i]];
    return out;
}

GrayImage median_filter(const GrayImage& img, int k) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("median_filter: window side must be odd and >= 1");
    if (k == 1) return img;

    const int r = k / 2;
    GrayImage out(img.width, img.height);
    std::vector<std::uint8_t> window(static_cast<size_t>(k) * k);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            size_t n = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) window[n++] = img.at_clamped(x + dx, y + dy);
            auto mid = window.begin() + static_cast<long>(n / 2);
            std::nth_element(window.begin(), mid, window.begin() + static_cast<long>(n));
            out.at(x, y) = *mid;
        }
    }
    return out;
}

GrayImage preprocess(const ColorImage& img, const PreprocessConfig& cfg) {
    GrayImage g = to_gray(img, cfg.gray_mode);
    if (cfg.equalize) g = histogram_equalize(g);
    return median_filter(g, cfg.median_kernel);
}

BinaryMask fundus_region_mask(const GrayImage& img, std::uint8_t threshold) {
    double sx = 0.0, sy = 0.0;
    std::uint64_t n = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(x, y) > threshold) {
                sx += x;
                sy += y;
                ++n;
            }
    BinaryMask mask(img.width, img.height);
    if (n == 0) return mask;

    const double cx = sx / static_cast<double>(n);
    const double cy = sy / static_cast<double>(n);
    const double radius = std::sqrt(static_cast<double>(n) / 3.14159265358979323846);
    const double r2 = radius * radius;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r2) mask.set(x, y, true);
        }
    return mask;
}

}  // namespace retina
