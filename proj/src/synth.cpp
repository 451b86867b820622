#include "retina/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "retina/rng.hpp"

namespace retina {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x, y;
};

struct Generator {
    const SynthParams& p;
    Rng rng;
    int size;
    double cx, cy, field_radius;

    FloatImage vessel_profile;  // max of Gaussian cross-sections
    BinaryMask vessel_mask;
    FloatImage lesion_delta_r, lesion_delta_g, lesion_delta_b;
    BinaryMask lesion_mask;
    int lesion_count = 0;

    explicit Generator(const SynthParams& params)
        : p(params),
          rng(params.seed),
          size(params.size),
          cx(params.size / 2.0),
          cy(params.size / 2.0),
          field_radius(0.47 * params.size),
          vessel_profile(params.size, params.size, 0.0),
          vessel_mask(params.size, params.size),
          lesion_delta_r(params.size, params.size, 0.0),
          lesion_delta_g(params.size, params.size, 0.0),
          lesion_delta_b(params.size, params.size, 0.0),
          lesion_mask(params.size, params.size) {}

    void stamp_vessel(Vec2 pos, double width) {
        const double sigma = width / 2.0;
        const double mask_r = sigma * std::sqrt(2.0 * std::log(2.0));  // half-maximum extent
        const int reach = static_cast<int>(std::ceil(3.0 * sigma)) + 1;
        const int x0 = std::max(0, static_cast<int>(pos.x) - reach);
        const int x1 = std::min(size - 1, static_cast<int>(pos.x) + reach);
        const int y0 = std::max(0, static_cast<int>(pos.y) - reach);
        const int y1 = std::min(size - 1, static_cast<int>(pos.y) + reach);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                double dx = x - pos.x, dy = y - pos.y;
                double d2 = dx * dx + dy * dy;
                double g = std::exp(-d2 / (2.0 * sigma * sigma));
                double& cell = vessel_profile.at(x, y);
                cell = std::max(cell, g);
                if (d2 <= mask_r * mask_r) vessel_mask.set(x, y, true);
            }
    }

    void grow_branch(Vec2 pos, double angle, double width, int depth) {
        if (depth <= 0 || width < 1.2) return;
        const double length = field_radius * rng.uniform(0.16, 0.24);
        const double step = 0.5;
        double travelled = 0.0;
        while (travelled < length) {
            angle += rng.uniform(-0.05, 0.05);
            pos.x += step * std::cos(angle);
            pos.y += step * std::sin(angle);
            travelled += step;
            double dx = pos.x - cx, dy = pos.y - cy;
            if (std::sqrt(dx * dx + dy * dy) > 0.92 * field_radius) return;
            stamp_vessel(pos, width);
        }
        const double spread1 = rng.uniform(0.25, 0.6);
        const double spread2 = rng.uniform(0.25, 0.6);
        grow_branch(pos, angle + spread1, width * 0.8, depth - 1);
        grow_branch(pos, angle - spread2, width * 0.8, depth - 1);
    }

    // soft radial blob added to the lesion deltas; marks the half-maximum
    // disk in the lesion mask
    void stamp_lesion(Vec2 pos, double radius, double ar, double ag, double ab) {
        const double sigma = radius / 2.0;
        const double mask_r = sigma * std::sqrt(2.0 * std::log(2.0));
        const int reach = static_cast<int>(std::ceil(3.0 * sigma)) + 1;
        const int x0 = std::max(0, static_cast<int>(pos.x) - reach);
        const int x1 = std::min(size - 1, static_cast<int>(pos.x) + reach);
        const int y0 = std::max(0, static_cast<int>(pos.y) - reach);
        const int y1 = std::min(size - 1, static_cast<int>(pos.y) + reach);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                double dx = x - pos.x, dy = y - pos.y;
                double d2 = dx * dx + dy * dy;
                double g = std::exp(-d2 / (2.0 * sigma * sigma));
                lesion_delta_r.at(x, y) += ar * g;
                lesion_delta_g.at(x, y) += ag * g;
                lesion_delta_b.at(x, y) += ab * g;
                if (d2 <= mask_r * mask_r) lesion_mask.set(x, y, true);
            }
    }

    // rejection-sampled center keeping lesions apart from each other and the
    // optic disc so mask components stay separate
    bool place_lesion(double radius, const Vec2& disc, double disc_radius,
                      std::vector<Vec2>& placed, std::vector<double>& placed_r, Vec2& out) {
        for (int attempt = 0; attempt < 400; ++attempt) {
            double a = rng.uniform(0.0, 2.0 * kPi);
            double r = field_radius * 0.78 * std::sqrt(rng.uniform());
            Vec2 c{cx + r * std::cos(a), cy + r * std::sin(a)};
            double ddx = c.x - disc.x, ddy = c.y - disc.y;
            if (std::sqrt(ddx * ddx + ddy * ddy) < disc_radius + 3.0 * radius + 4.0) continue;
            bool clash = false;
            for (size_t i = 0; i < placed.size(); ++i) {
                double lx = c.x - placed[i].x, ly = c.y - placed[i].y;
                if (std::sqrt(lx * lx + ly * ly) < 3.0 * (radius + placed_r[i]) + 6.0) {
                    clash = true;
                    break;
                }
            }
            if (clash) continue;
            placed.push_back(c);
            placed_r.push_back(radius);
            out = c;
            return true;
        }
        return false;
    }
};

}  // namespace

SynthResult generate_fundus(const SynthParams& p) {
    if (p.size < 64) throw std::invalid_argument("generate_fundus: size must be >= 64");
    if (p.branch_depth < 1) throw std::invalid_argument("generate_fundus: branch depth must be >= 1");
    for (int c : {p.drusen_count_min, p.drusen_count_max, p.dr_dot_count_min, p.dr_dot_count_max,
                  p.dr_patch_count_min, p.dr_patch_count_max})
        if (c < 0) throw std::invalid_argument("generate_fundus: lesion counts must be >= 0");

    Generator gen(p);
    Rng& rng = gen.rng;
    const int size = p.size;

    // optic disc on a randomly chosen side, vessels fan out toward the field
    const double side = rng.uniform() < 0.5 ? 0.0 : kPi;
    const double disc_angle = side + rng.uniform(-0.25, 0.25);
    const Vec2 disc{gen.cx + 0.55 * gen.field_radius * std::cos(disc_angle),
                    gen.cy + 0.55 * gen.field_radius * std::sin(disc_angle)};
    const double disc_radius = 0.11 * gen.field_radius + rng.uniform(-1.0, 1.0);

    const int num_roots = 5;
    const double fan = 1.1;
    const double root_width = 0.0165 * size;
    for (int i = 0; i < num_roots; ++i) {
        double t = num_roots == 1 ? 0.0 : -fan + 2.0 * fan * i / (num_roots - 1);
        double angle = disc_angle + kPi + t + rng.uniform(-0.08, 0.08);
        gen.stamp_vessel({disc.x, disc.y}, root_width);  // keep the tree rooted in one component
        gen.grow_branch({disc.x, disc.y}, angle, root_width, p.branch_depth);
    }

    const double amp = 2.0 * p.lesion_contrast;
    std::vector<Vec2> placed;
    std::vector<double> placed_r;
    if (p.label == ClassLabel::Drusen) {
        int want = rng.uniform_int(p.drusen_count_min, p.drusen_count_max);
        for (int i = 0; i < want; ++i) {
            double radius = rng.uniform(4.0, 8.0) * size / 256.0;
            Vec2 c;
            if (!gen.place_lesion(radius, disc, disc_radius, placed, placed_r, c)) break;
            gen.stamp_lesion(c, radius, amp, amp * 0.85, amp * 0.25);
            ++gen.lesion_count;
        }
    } else if (p.label == ClassLabel::DiabeticRetinopathy) {
        int dots = rng.uniform_int(p.dr_dot_count_min, p.dr_dot_count_max);
        for (int i = 0; i < dots; ++i) {
            double radius = rng.uniform(1.8, 3.2) * size / 256.0;
            Vec2 c;
            if (!gen.place_lesion(radius, disc, disc_radius, placed, placed_r, c)) break;
            gen.stamp_lesion(c, radius, -amp, -amp, -amp * 0.4);
            ++gen.lesion_count;
        }
        int patches = rng.uniform_int(p.dr_patch_count_min, p.dr_patch_count_max);
        for (int i = 0; i < patches; ++i) {
            double radius = rng.uniform(5.0, 9.0) * size / 256.0;
            Vec2 c;
            if (!gen.place_lesion(radius, disc, disc_radius, placed, placed_r, c)) break;
            // irregular patch: overlapping jittered sub-blobs, still one component
            gen.stamp_lesion(c, radius, amp, amp * 0.9, amp * 0.3);
            for (int s = 0; s < 2; ++s) {
                Vec2 j{c.x + rng.uniform(-0.5, 0.5) * radius, c.y + rng.uniform(-0.5, 0.5) * radius};
                gen.stamp_lesion(j, radius * 0.7, amp * 0.6, amp * 0.55, amp * 0.2);
            }
            ++gen.lesion_count;
        }
    }

    ColorImage img(size, size);
    const double base_r = 185.0, base_g = 105.0, base_b = 45.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double dx = x - gen.cx, dy = y - gen.cy;
            double dist = std::sqrt(dx * dx + dy * dy);
            double r, g, b;
            if (dist > gen.field_radius) {
                r = 4.0;
                g = 3.0;
                b = 2.0;
            } else {
                double ratio = dist / gen.field_radius;
                double illum = 1.0 - p.gradient_strength * ratio * ratio;
                r = base_r * illum;
                g = base_g * illum;
                b = base_b * illum;

                double ddx = x - disc.x, ddy = y - disc.y;
                double disc_d = std::sqrt(ddx * ddx + ddy * ddy);
                if (disc_d < disc_radius + 3.0) {
                    double t = std::clamp((disc_radius - disc_d) / 3.0 + 1.0, 0.0, 1.0);
                    r += t * (235.0 - r);
                    g += t * (195.0 - g);
                    b += t * (120.0 - b);
                }

                double v = gen.vessel_profile.at(x, y);
                r *= 1.0 - 0.35 * v;
                g *= 1.0 - 0.60 * v;
                b *= 1.0 - 0.30 * v;

                r += gen.lesion_delta_r.at(x, y);
                g += gen.lesion_delta_g.at(x, y);
                b += gen.lesion_delta_b.at(x, y);
            }
            r += p.noise_sigma * rng.normal();
            g += p.noise_sigma * rng.normal();
            b += p.noise_sigma * rng.normal();
            img.at(x, y) = {static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0)),
                            static_cast<std::uint8_t>(std::clamp(g, 0.0, 255.0)),
                            static_cast<std::uint8_t>(std::clamp(b, 0.0, 255.0))};
        }

    SynthResult result;
    result.image = std::move(img);
    result.truth.vessel_mask = std::move(gen.vessel_mask);
    result.truth.lesion_mask = std::move(gen.lesion_mask);
    result.truth.label = p.label;
    result.truth.lesion_count = gen.lesion_count;
    return result;
}

}  // namespace retina
