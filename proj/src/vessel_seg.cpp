#include "retina/vessel_seg.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "retina/filters.hpp"

namespace retina {

namespace {

struct Offset {
    int dx, dy;
};

Offset direction_step(Direction dir) {
    switch (dir) {
        case Direction::East: return {1, 0};
        case Direction::NorthEast: return {1, -1};
        case Direction::North: return {0, -1};
        case Direction::NorthWest: return {-1, -1};
        case Direction::West: return {-1, 0};
        case Direction::SouthWest: return {-1, 1};
        case Direction::South: return {0, 1};
        case Direction::SouthEast: return {1, 1};
    }
    return {1, 0};
}

// Digital line segment through the origin, `length` pixels, angle `theta`.
std::vector<Offset> linear_element(double theta, int length) {
    std::vector<Offset> pts;
    pts.reserve(static_cast<size_t>(length));
    const int h = (length - 1) / 2;
    const double c = std::cos(theta), s = std::sin(theta);
    if (std::abs(c) >= std::abs(s)) {
        const double slope = s / c;
        for (int i = -h; i <= h; ++i) pts.push_back({i, static_cast<int>(std::llround(i * slope))});
    } else {
        const double slope = c / s;
        for (int i = -h; i <= h; ++i) pts.push_back({static_cast<int>(std::llround(i * slope)), i});
    }
    return pts;
}

FloatImage erode(const FloatImage& img, const std::vector<Offset>& se) {
    FloatImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double m = img.at_clamped(x + se[0].dx, y + se[0].dy);
            for (size_t k = 1; k < se.size(); ++k)
                m = std::min(m, img.at_clamped(x + se[k].dx, y + se[k].dy));
            out.at(x, y) = m;
        }
    return out;
}

FloatImage dilate(const FloatImage& img, const std::vector<Offset>& se) {
    FloatImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double m = img.at_clamped(x + se[0].dx, y + se[0].dy);
            for (size_t k = 1; k < se.size(); ++k)
                m = std::max(m, img.at_clamped(x + se[k].dx, y + se[k].dy));
            out.at(x, y) = m;
        }
    return out;
}

FloatImage opening(const FloatImage& img, const std::vector<Offset>& se) {
    return dilate(erode(img, se), se);
}

FloatImage line_mean(const FloatImage& img, const std::vector<Offset>& se) {
    FloatImage out(img.width, img.height);
    const double inv = 1.0 / static_cast<double>(se.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (const Offset& o : se) acc += img.at_clamped(x + o.dx, y + o.dy);
            out.at(x, y) = acc * inv;
        }
    return out;
}

// Grayscale geodesic reconstruction by dilation (marker <= mask), sequential
// raster/anti-raster sweeps run to stability.
FloatImage geodesic_reconstruct(const FloatImage& marker, const FloatImage& mask) {
    FloatImage m(marker.width, marker.height);
    for (size_t i = 0; i < m.values.size(); ++i)
        m.values[i] = std::min(marker.values[i], mask.values[i]);

    const int w = m.width, h = m.height;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = m.at(x, y);
                if (x > 0) v = std::max(v, m.at(x - 1, y));
                if (y > 0) {
                    v = std::max(v, m.at(x, y - 1));
                    if (x > 0) v = std::max(v, m.at(x - 1, y - 1));
                    if (x + 1 < w) v = std::max(v, m.at(x + 1, y - 1));
                }
                v = std::min(v, mask.at(x, y));
                if (v > m.at(x, y)) {
                    m.at(x, y) = v;
                    changed = true;
                }
            }
        for (int y = h - 1; y >= 0; --y)
            for (int x = w - 1; x >= 0; --x) {
                double v = m.at(x, y);
                if (x + 1 < w) v = std::max(v, m.at(x + 1, y));
                if (y + 1 < h) {
                    v = std::max(v, m.at(x, y + 1));
                    if (x > 0) v = std::max(v, m.at(x - 1, y + 1));
                    if (x + 1 < w) v = std::max(v, m.at(x + 1, y + 1));
                }
                v = std::min(v, mask.at(x, y));
                if (v > m.at(x, y)) {
                    m.at(x, y) = v;
                    changed = true;
                }
            }
    }
    return m;
}

}  // namespace

BinaryMask dbded_1d_candidates(const GrayImage& img, Direction dir, const DbdedConfig& cfg) {
    if (cfg.eta < 0.0) throw std::invalid_argument("dbded: eta must be >= 0");
    if (cfg.sample_offsets.empty()) throw std::invalid_argument("dbded: no sample offsets");
    for (size_t i = 0; i < cfg.sample_offsets.size(); ++i) {
        if (cfg.sample_offsets[i] < 1 || (i > 0 && cfg.sample_offsets[i] <= cfg.sample_offsets[i - 1]))
            throw std::invalid_argument("dbded: offsets must be strictly increasing positive");
    }

    const Offset step = direction_step(dir);
    const size_t n = cfg.sample_offsets.size();
    BinaryMask out(img.width, img.height);
    std::vector<double> samples(n);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            bool inside = true;
            for (size_t k = 0; k < n; ++k) {
                int sx = x + cfg.sample_offsets[k] * step.dx;
                int sy = y + cfg.sample_offsets[k] * step.dy;
                if (sx < 0 || sx >= img.width || sy < 0 || sy >= img.height) {
                    inside = false;
                    break;
                }
                samples[k] = img.at(sx, sy);
            }
            if (!inside) continue;
            double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
            double var = 0.0;
            for (double s : samples) var += (s - mean) * (s - mean);
            var /= static_cast<double>(n);
            if (img.at(x, y) >= mean + std::sqrt(var) + cfg.eta) out.set(x, y, true);
        }
    }
    return out;
}

BinaryMask dbded_decide(const std::array<BinaryMask, 8>& candidates) {
    const int w = candidates[0].width, h = candidates[0].height;
    for (const BinaryMask& c : candidates)
        if (c.width != w || c.height != h)
            throw std::invalid_argument("dbded_decide: candidate mask dimensions differ");

    // per-pixel direction counts and the union of all candidates
    std::vector<std::uint8_t> count(static_cast<size_t>(w) * h, 0);
    BinaryMask any(w, h);
    for (const BinaryMask& c : candidates)
        for (size_t i = 0; i < c.bits.size(); ++i) {
            count[i] += c.bits[i];
            any.bits[i] |= c.bits[i];
        }

    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t n = count[static_cast<size_t>(y) * w + x];
            if (n < 2 || n > 7) continue;
            bool neighbor = false;
            for (int dy = -1; dy <= 1 && !neighbor; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (any.get(nx, ny)) {
                        neighbor = true;
                        break;
                    }
                }
            if (neighbor) out.set(x, y, true);
        }
    return out;
}

BinaryMask dbded_edges(const GrayImage& img, const DbdedConfig& cfg) {
    std::array<BinaryMask, 8> candidates;
    for (size_t i = 0; i < kAllDirections.size(); ++i)
        candidates[i] = dbded_1d_candidates(img, kAllDirections[i], cfg);
    return dbded_decide(candidates);
}

FloatImage enhance_vessels(const GrayImage& img, const VesselnessConfig& cfg) {
    if (cfg.num_orientations < 4) throw std::invalid_argument("enhance_vessels: need >= 4 orientations");
    if (cfg.line_length < 3 || cfg.line_length % 2 == 0)
        throw std::invalid_argument("enhance_vessels: line_length must be odd and >= 3");

    FloatImage work = to_float(img);
    if (cfg.dark_vessels)
        for (double& v : work.values) v = 255.0 - v;

    const double pi = 3.14159265358979323846;
    std::vector<std::vector<Offset>> elements;
    elements.reserve(static_cast<size_t>(cfg.num_orientations));
    for (int i = 0; i < cfg.num_orientations; ++i)
        elements.push_back(linear_element(pi * i / cfg.num_orientations, cfg.line_length));

    // noise reduction: smooth, keep only structures that survive some oriented
    // opening, then restore their profiles by reconstruction under the smooth
    FloatImage smooth = gaussian_blur(work, cfg.smoothing_sigma);
    FloatImage sup_open = opening(smooth, elements[0]);
    for (size_t i = 1; i < elements.size(); ++i) {
        FloatImage o = opening(smooth, elements[i]);
        for (size_t k = 0; k < sup_open.values.size(); ++k)
            sup_open.values[k] = std::max(sup_open.values[k], o.values[k]);
    }
    FloatImage rec = geodesic_reconstruct(sup_open, smooth);

    // linear pattern improvement: strongest oriented top-hat
    FloatImage tophat(rec.width, rec.height, 0.0);
    for (const std::vector<Offset>& se : elements) {
        FloatImage o = opening(rec, se);
        for (size_t k = 0; k < tophat.values.size(); ++k)
            tophat.values[k] = std::max(tophat.values[k], rec.values[k] - o.values[k]);
    }

    // cross curvature: ridges have negative Laplacian at the centerline
    FloatImage curv = laplacian(gaussian_blur(tophat, cfg.smoothing_sigma));
    for (double& v : curv.values) v = std::max(0.0, -v);

    // linear filtering: average along the best-supported orientation
    FloatImage out(curv.width, curv.height, 0.0);
    for (const std::vector<Offset>& se : elements) {
        FloatImage m = line_mean(curv, se);
        for (size_t k = 0; k < out.values.size(); ++k)
            out.values[k] = std::max(out.values[k], m.values[k]);
    }
    return out;
}

BinaryMask threshold_vesselness(const FloatImage& v, double quantile) {
    if (quantile <= 0.0 || quantile >= 1.0)
        throw std::invalid_argument("threshold_vesselness: quantile must be in (0, 1)");
    std::vector<double> positives;
    for (double x : v.values)
        if (x > 0.0) positives.push_back(x);
    BinaryMask out(v.width, v.height);
    if (positives.empty()) return out;

    size_t idx = std::min(positives.size() - 1,
                          static_cast<size_t>(quantile * static_cast<double>(positives.size())));
    std::nth_element(positives.begin(), positives.begin() + static_cast<long>(idx), positives.end());
    const double t = positives[idx];
    for (size_t i = 0; i < v.values.size(); ++i) out.bits[i] = v.values[i] >= t;
    return out;
}

LabelMap connected_components(const BinaryMask& mask, Connectivity connectivity) {
    const int w = mask.width, h = mask.height;
    LabelMap map;
    map.width = w;
    map.height = h;
    map.labels.assign(static_cast<size_t>(w) * h, 0);

    // union-find over provisional labels
    std::vector<int> parent(1, 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    const bool diag = connectivity == Connectivity::Eight;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.get(x, y)) continue;
            int up = y > 0 ? map.labels[static_cast<size_t>(y - 1) * w + x] : 0;
            int left = x > 0 ? map.labels[static_cast<size_t>(y) * w + x - 1] : 0;
            int upleft = diag && y > 0 && x > 0 ? map.labels[static_cast<size_t>(y - 1) * w + x - 1] : 0;
            int upright = diag && y > 0 && x + 1 < w ? map.labels[static_cast<size_t>(y - 1) * w + x + 1] : 0;

            int label = 0;
            for (int n : {up, left, upleft, upright})
                if (n != 0) label = label == 0 ? n : std::min(label, n);
            if (label == 0) {
                label = static_cast<int>(parent.size());
                parent.push_back(label);
            } else {
                for (int n : {up, left, upleft, upright})
                    if (n != 0) unite(label, n);
            }
            map.labels[static_cast<size_t>(y) * w + x] = label;
        }

    // final ids in order of first raster appearance
    std::vector<int> remap(parent.size(), 0);
    int next = 0;
    for (int& l : map.labels) {
        if (l == 0) continue;
        int root = find(l);
        if (remap[root] == 0) remap[root] = ++next;
        l = remap[root];
    }
    map.num_labels = next;
    return map;
}

BinaryMask morphological_reconstruct(const BinaryMask& marker, const BinaryMask& mask,
                                     Connectivity connectivity) {
    if (marker.width != mask.width || marker.height != mask.height)
        throw std::invalid_argument("morphological_reconstruct: dimension mismatch");

    size_t clipped = 0;
    for (size_t i = 0; i < marker.bits.size(); ++i)
        if (marker.bits[i] && !mask.bits[i]) ++clipped;
    if (clipped > 0)
        std::cerr << "morphological_reconstruct: " << clipped
                  << " marker pixel(s) outside the mask were clipped\n";

    LabelMap labels = connected_components(mask, connectivity);
    std::vector<std::uint8_t> keep(static_cast<size_t>(labels.num_labels) + 1, 0);
    for (size_t i = 0; i < marker.bits.size(); ++i)
        if (marker.bits[i] && mask.bits[i]) keep[static_cast<size_t>(labels.labels[i])] = 1;

    BinaryMask out(mask.width, mask.height);
    for (size_t i = 0; i < out.bits.size(); ++i)
        out.bits[i] = labels.labels[i] != 0 && keep[static_cast<size_t>(labels.labels[i])];
    return out;
}

BinaryMask remove_small_components(const BinaryMask& mask, int min_px, Connectivity connectivity) {
    LabelMap labels = connected_components(mask, connectivity);
    std::vector<int> size(static_cast<size_t>(labels.num_labels) + 1, 0);
    for (int l : labels.labels) ++size[static_cast<size_t>(l)];
    BinaryMask out(mask.width, mask.height);
    for (size_t i = 0; i < out.bits.size(); ++i)
        out.bits[i] = labels.labels[i] != 0 && size[static_cast<size_t>(labels.labels[i])] >= min_px;
    return out;
}

BinaryMask segment_vasculature(const GrayImage& img, const SegmentConfig& cfg) {
    if (cfg.marker_quantile < cfg.mask_quantile)
        throw std::invalid_argument("segment_vasculature: marker quantile below mask quantile");
    FloatImage v = enhance_vessels(img, cfg.vesselness);
    BinaryMask marker = threshold_vesselness(v, cfg.marker_quantile);
    BinaryMask extent = threshold_vesselness(v, cfg.mask_quantile);
    BinaryMask rec = morphological_reconstruct(marker, extent, cfg.connectivity);
    return remove_small_components(rec, cfg.min_component_px, cfg.connectivity);
}

}  // namespace retina
