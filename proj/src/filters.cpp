#include "retina/filters.hpp"

#include <cmath>

namespace retina {

FloatImage to_float(const GrayImage& img) {
    FloatImage out(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i) out.values[i] = img.pixels[i];
    return out;
}

FloatImage gaussian_blur(const FloatImage& img, double sigma) {
    if (sigma <= 0.0) return img;
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    FloatImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img.at_clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    FloatImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at_clamped(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

FloatImage laplacian(const FloatImage& img) {
    FloatImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = img.at_clamped(x + 1, y) + img.at_clamped(x - 1, y) +
                           img.at_clamped(x, y + 1) + img.at_clamped(x, y - 1) - 4.0 * img.at(x, y);
    return out;
}

}  // namespace retina
