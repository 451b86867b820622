#pragma once

#include <array>
#include <vector>

#include "retina/image.hpp"

// Binary vasculature map extraction: oriented morphological enhancement,
// a decision-based directional edge detector (DBDED), connected component
// labeling and morphological reconstruction.

namespace retina {

enum class Connectivity { Four = 4, Eight = 8 };

// Compass directions, y pointing down.
enum class Direction { East, NorthEast, North, NorthWest, West, SouthWest, South, SouthEast };

constexpr std::array<Direction, 8> kAllDirections = {
    Direction::East,  Direction::NorthEast, Direction::North, Direction::NorthWest,
    Direction::West,  Direction::SouthWest, Direction::South, Direction::SouthEast};

struct DbdedConfig {
    double eta = 10.0;                      // constant threshold added on top of Av + Sd
    std::vector<int> sample_offsets{1, 2, 3};  // look-ahead distances along the direction
};

struct VesselnessConfig {
    int num_orientations = 12;
    int line_length = 9;  // odd
    double smoothing_sigma = 1.5;
    bool dark_vessels = true;  // dark-on-bright polarity; inverts the input first
};

struct SegmentConfig {
    VesselnessConfig vesselness;
    double marker_quantile = 0.98;  // high-confidence seed
    double mask_quantile = 0.90;    // low-confidence extent
    int min_component_px = 30;
    Connectivity connectivity = Connectivity::Eight;
};

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels;  // 0 = background, regions numbered 1..num_labels
    int num_labels = 0;

    int at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

// 1-D edge candidates from one direction: (x, y) is a candidate iff
// I(x,y) >= Av[samples] + Sd[samples] + eta, samples taken at the configured
// offsets along the direction. Sd is the population standard deviation.
// Pixels whose samples leave the image are never candidates.
BinaryMask dbded_1d_candidates(const GrayImage& img, Direction dir, const DbdedConfig& cfg);

// 2-D decision over the 8 per-direction candidate masks: a pixel is an edge
// iff it is a candidate in at least 2 and at most 7 directions and at least
// one 8-neighbor is a candidate in some direction.
BinaryMask dbded_decide(const std::array<BinaryMask, 8>& candidates);

BinaryMask dbded_edges(const GrayImage& img, const DbdedConfig& cfg);

// Vesselness enhancement: Gaussian smoothing, supremum of openings with
// oriented linear structuring elements plus geodesic reconstruction, oriented
// top-hats, cross-curvature scoring via the Laplacian, and a final supremum
// of oriented linear means. Output is non-negative and invariant under adding
// a constant to the input intensities.
FloatImage enhance_vessels(const GrayImage& img, const VesselnessConfig& cfg);

// Bits where the map value reaches the given quantile of its positive values.
// An all-zero map yields an empty mask.
BinaryMask threshold_vesselness(const FloatImage& v, double quantile);

LabelMap connected_components(const BinaryMask& mask, Connectivity connectivity);

// Union of the mask's connected components that intersect the marker
// (equivalently the fixed point of dilate-then-intersect). Marker pixels
// outside the mask are clipped with a warning on stderr.
BinaryMask morphological_reconstruct(const BinaryMask& marker, const BinaryMask& mask,
                                     Connectivity connectivity = Connectivity::Eight);

BinaryMask remove_small_components(const BinaryMask& mask, int min_px, Connectivity connectivity);

// enhance -> quantile thresholds -> hysteresis by reconstruction -> small
// component removal.
BinaryMask segment_vasculature(const GrayImage& img, const SegmentConfig& cfg);

}  // namespace retina
