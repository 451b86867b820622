#pragma once

#include <cstdint>

#include "retina/classifier.hpp"
#include "retina/image.hpp"

// Deterministic synthetic fundus images with known vessel and lesion ground
// truth. Vessels are a recursive binary tree with Gaussian cross-sections;
// drusen are soft bright blobs, diabetic retinopathy adds dark dots and
// bright irregular patches. Appearance is deliberately simple; the point is
// separable classes and exact truth masks.

namespace retina {

struct SynthParams {
    int size = 256;  // square, >= 64
    ClassLabel label = ClassLabel::Normal;
    std::uint32_t seed = 1;

    int branch_depth = 5;
    int drusen_count_min = 4;
    int drusen_count_max = 8;
    int dr_dot_count_min = 6;
    int dr_dot_count_max = 12;
    int dr_patch_count_min = 2;
    int dr_patch_count_max = 4;

    double lesion_contrast = 30.0;    // minimum mean offset inside a lesion mask
    double gradient_strength = 0.35;  // radial illumination falloff
    double noise_sigma = 4.0;         // additive Gaussian noise
};

struct GroundTruth {
    BinaryMask vessel_mask;
    BinaryMask lesion_mask;
    ClassLabel label = ClassLabel::Normal;
    int lesion_count = 0;
};

struct SynthResult {
    ColorImage image;
    GroundTruth truth;
};

SynthResult generate_fundus(const SynthParams& params);

}  // namespace retina
