#pragma once

#include "retina/image.hpp"

// Small shared kernel ops on real-valued rasters. All neighborhood access
// replicates edges (clamped indexing) so constant images stay constant.

namespace retina {

FloatImage to_float(const GrayImage& img);

// Separable Gaussian, kernel radius ceil(3*sigma), weights normalized to sum 1.
// sigma <= 0 returns the input unchanged.
FloatImage gaussian_blur(const FloatImage& img, double sigma);

// 3x3 discrete Laplacian (4-neighbor stencil).
FloatImage laplacian(const FloatImage& img);

}  // namespace retina
