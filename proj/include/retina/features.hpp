#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "retina/image.hpp"
#include "retina/preprocess.hpp"

// Windowed vascular structure maps and statistical texture descriptors that
// form the classifier input.

namespace retina {

// Centered window, M rows by N columns, both odd.
struct WindowSpec {
    int rows = 15;  // M
    int cols = 15;  // N
};

enum class FeatureKind { Luminance, Density, Thickness, Orientation };

struct FeatureMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    FeatureKind kind = FeatureKind::Luminance;

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

struct TextureStats {
    double mean = 0.0;
    double variance = 0.0;  // second central moment
    double skewness = 0.0;  // third central moment
    double entropy = 0.0;   // nats
};

// Complex moments indexed by (order n, repetition l); valid pairs satisfy
// |l| <= n and n - |l| even.
struct ZernikeTable {
    int n_max = 0;
    std::map<std::pair<int, int>, std::complex<double>> entries;

    // throws std::invalid_argument for invalid (n, l) requests
    std::complex<double> at(int n, int l) const;
};

struct FeatureSchema {
    int block_grid = 4;     // G: maps are aggregated over a GxG grid
    int zernike_n_max = 6;  // magnitudes |A_nl|, l >= 0, enter the vector
    std::string id() const;
};

// Mean intensity over the window (edge replication).
FeatureMap luminance_map(const GrayImage& img, const WindowSpec& w);

// Fraction of vessel pixels in the window, in [0, 1].
FeatureMap vessel_density_map(const BinaryMask& b, const WindowSpec& w);

// Vessel area over vessel boundary length in the window; boundary pixels are
// vessel pixels with a non-vessel 4-neighbor (out-of-image counts as
// non-vessel). 0 where the window holds no vessel pixels.
FeatureMap vessel_thickness_map(const BinaryMask& b, const WindowSpec& w);

// Local vessel axis direction in degrees, in (-90, 90], measured with y up
// (0 = horizontal, 90 = vertical). Doubled-angle average of structure-tensor
// orientations of the smoothed mask indicator; 0 where the window holds no
// vessel pixels.
FeatureMap vessel_orientation_map(const BinaryMask& b, const WindowSpec& w);

// n-th central moment of the gray-level distribution.
double central_moment(const Histogram& hist, int n);

// -sum(p ln p) over occupied bins, nats.
double histogram_entropy(const Histogram& hist);

TextureStats texture_stats(std::span<const std::uint8_t> pixels);

// Kernel-density (Parzen) entropy estimate with a Gaussian kernel of width h:
// H ~ -(1/N) sum_i ln[(1/N) sum_j g(z_i - z_j)].
double entropy_parzen(std::span<const double> values, double h);

double silverman_bandwidth(std::span<const double> values);

// 1 - centered correlation; range [0, 2]. Throws on constant input.
double correlation_distance(std::span<const double> xr, std::span<const double> xs);

// Moments of a square patch mapped so its inscribed disk is the unit disk;
// pixels outside the disk are ignored.
ZernikeTable zernike_moments(const GrayImage& patch, int n_max);

// Expansion sum(A_nl V_nl) evaluated on a size x size grid, zero outside the
// unit disk.
FloatImage zernike_reconstruct(const ZernikeTable& table, int size);

// Radial polynomial R_nl(r); throws for invalid (n, l).
double zernike_radial(int n, int l, double r);

size_t feature_length(const FeatureSchema& schema);

// Fixed-layout concatenation: GxG block means of the four maps (luminance,
// density, thickness, orientation), then mean/variance/skewness/entropy, then
// |A_nl| for n <= n_max, l >= 0, in (n, l) order.
std::vector<double> build_feature_vector(const FeatureMap& lum, const FeatureMap& density,
                                         const FeatureMap& thickness, const FeatureMap& orientation,
                                         const TextureStats& stats, const ZernikeTable& zernike,
                                         const FeatureSchema& schema);

}  // namespace retina
