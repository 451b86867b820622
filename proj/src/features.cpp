#include "retina/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "retina/filters.hpp"

namespace retina {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_window(const WindowSpec& w) {
    if (w.rows < 1 || w.cols < 1 || w.rows % 2 == 0 || w.cols % 2 == 0)
        throw std::invalid_argument("window sides must be odd and >= 1");
}

// Separable windowed sum with edge replication.
FloatImage window_sum(const FloatImage& img, const WindowSpec& w) {
    const int hr = (w.rows - 1) / 2, hc = (w.cols - 1) / 2;
    FloatImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dx = -hc; dx <= hc; ++dx) acc += img.at_clamped(x + dx, y);
            tmp.at(x, y) = acc;
        }
    FloatImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -hr; dy <= hr; ++dy) acc += tmp.at_clamped(x, y + dy);
            out.at(x, y) = acc;
        }
    return out;
}

FloatImage mask_to_float(const BinaryMask& b) {
    FloatImage f(b.width, b.height);
    for (size_t i = 0; i < b.bits.size(); ++i) f.values[i] = b.bits[i];
    return f;
}

double kahan_sum(std::span<const double> terms) {
    double sum = 0.0, comp = 0.0;
    for (double t : terms) {
        double y = t - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum;
}

bool valid_pair(int n, int l) { return n >= 0 && std::abs(l) <= n && (n - std::abs(l)) % 2 == 0; }

}  // namespace

std::string FeatureSchema::id() const {
    return "fv1-g" + std::to_string(block_grid) + "-z" + std::to_string(zernike_n_max);
}

FeatureMap luminance_map(const GrayImage& img, const WindowSpec& w) {
    check_window(w);
    FloatImage sums = window_sum(to_float(img), w);
    FeatureMap out{img.width, img.height, std::move(sums.values), FeatureKind::Luminance};
    const double inv = 1.0 / (static_cast<double>(w.rows) * w.cols);
    for (double& v : out.values) v *= inv;
    return out;
}

FeatureMap vessel_density_map(const BinaryMask& b, const WindowSpec& w) {
    check_window(w);
    FloatImage sums = window_sum(mask_to_float(b), w);
    FeatureMap out{b.width, b.height, std::move(sums.values), FeatureKind::Density};
    const double inv = 1.0 / (static_cast<double>(w.rows) * w.cols);
    for (double& v : out.values) v *= inv;
    return out;
}

FeatureMap vessel_thickness_map(const BinaryMask& b, const WindowSpec& w) {
    check_window(w);
    BinaryMask boundary(b.width, b.height);
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x) {
            if (!b.get(x, y)) continue;
            bool edge = x == 0 || x == b.width - 1 || y == 0 || y == b.height - 1 ||
                        !b.get(x - 1, y) || !b.get(x + 1, y) || !b.get(x, y - 1) || !b.get(x, y + 1);
            boundary.set(x, y, edge);
        }
    FloatImage area = window_sum(mask_to_float(b), w);
    FloatImage perim = window_sum(mask_to_float(boundary), w);
    FeatureMap out{b.width, b.height, std::vector<double>(area.values.size(), 0.0),
                   FeatureKind::Thickness};
    for (size_t i = 0; i < out.values.size(); ++i) {
        if (area.values[i] <= 0.0) continue;
        out.values[i] = area.values[i] / std::max(perim.values[i], 1.0);
    }
    return out;
}

FeatureMap vessel_orientation_map(const BinaryMask& b, const WindowSpec& w) {
    check_window(w);
    FloatImage f = gaussian_blur(mask_to_float(b), 1.5);

    // doubled-angle tensor terms; gy measured with y up
    FloatImage ta(b.width, b.height), tb(b.width, b.height);
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x) {
            double gx = 0.5 * (f.at_clamped(x + 1, y) - f.at_clamped(x - 1, y));
            double gy = -0.5 * (f.at_clamped(x, y + 1) - f.at_clamped(x, y - 1));
            ta.at(x, y) = gx * gx - gy * gy;
            tb.at(x, y) = 2.0 * gx * gy;
        }
    FloatImage sa = window_sum(ta, w);
    FloatImage sb = window_sum(tb, w);
    FloatImage occupancy = window_sum(mask_to_float(b), w);

    FeatureMap out{b.width, b.height, std::vector<double>(sa.values.size(), 0.0),
                   FeatureKind::Orientation};
    for (size_t i = 0; i < out.values.size(); ++i) {
        if (occupancy.values[i] <= 0.0) continue;
        double grad_angle = 0.5 * std::atan2(sb.values[i], sa.values[i]);
        double axis = grad_angle * 180.0 / kPi + 90.0;  // vessel axis is normal to the gradient
        if (axis > 90.0) axis -= 180.0;
        if (axis <= -90.0) axis += 180.0;
        out.values[i] = axis;
    }
    return out;
}

double central_moment(const Histogram& hist, int n) {
    if (hist.total == 0) throw std::invalid_argument("central_moment: empty histogram");
    if (n < 0) throw std::invalid_argument("central_moment: order must be >= 0");

    std::uint64_t weighted = 0;
    for (int z = 0; z < 256; ++z) weighted += hist.counts[z] * static_cast<std::uint64_t>(z);
    const double mean = static_cast<double>(weighted) / static_cast<double>(hist.total);

    std::vector<double> terms;
    terms.reserve(256);
    for (int z = 0; z < 256; ++z) {
        if (hist.counts[z] == 0) continue;
        double p = static_cast<double>(hist.counts[z]) / static_cast<double>(hist.total);
        terms.push_back(std::pow(z - mean, n) * p);
    }
    return kahan_sum(terms);
}

double histogram_entropy(const Histogram& hist) {
    if (hist.total == 0) throw std::invalid_argument("histogram_entropy: empty histogram");
    double h = 0.0;
    for (std::uint64_t c : hist.counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(hist.total);
        h -= p * std::log(p);
    }
    return h;
}

TextureStats texture_stats(std::span<const std::uint8_t> pixels) {
    if (pixels.empty()) throw std::invalid_argument("texture_stats: empty window");
    Histogram h;
    for (std::uint8_t v : pixels) ++h.counts[v];
    h.total = pixels.size();

    std::uint64_t weighted = 0;
    for (int z = 0; z < 256; ++z) weighted += h.counts[z] * static_cast<std::uint64_t>(z);
    TextureStats s;
    s.mean = static_cast<double>(weighted) / static_cast<double>(h.total);
    s.variance = central_moment(h, 2);
    s.skewness = central_moment(h, 3);
    s.entropy = histogram_entropy(h);
    return s;
}

double entropy_parzen(std::span<const double> values, double h) {
    if (values.empty()) throw std::invalid_argument("entropy_parzen: empty window");
    if (h <= 0.0) throw std::invalid_argument("entropy_parzen: kernel width must be > 0");
    const size_t n = values.size();
    const double norm = 1.0 / (std::sqrt(2.0 * kPi) * h);
    const double inv2h2 = 1.0 / (2.0 * h * h);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double density = 0.0;
        for (size_t j = 0; j < n; ++j) {
            double d = values[i] - values[j];
            density += std::exp(-d * d * inv2h2);
        }
        acc += std::log(density * norm / static_cast<double>(n));
    }
    return -acc / static_cast<double>(n);
}

double silverman_bandwidth(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("silverman_bandwidth: need >= 2 samples");
    const double n = static_cast<double>(values.size());
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    return 1.06 * sd * std::pow(n, -0.2);
}

double correlation_distance(std::span<const double> xr, std::span<const double> xs) {
    if (xr.size() != xs.size() || xr.size() < 2)
        throw std::invalid_argument("correlation_distance: need equal lengths >= 2");
    const double n = static_cast<double>(xr.size());
    double mr = std::accumulate(xr.begin(), xr.end(), 0.0) / n;
    double ms = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double dot = 0.0, nr = 0.0, ns = 0.0;
    for (size_t i = 0; i < xr.size(); ++i) {
        double a = xr[i] - mr, b = xs[i] - ms;
        dot += a * b;
        nr += a * a;
        ns += b * b;
    }
    if (nr == 0.0 || ns == 0.0)
        throw std::invalid_argument("correlation_distance: constant vector");
    return 1.0 - dot / (std::sqrt(nr) * std::sqrt(ns));
}

double zernike_radial(int n, int l, double r) {
    if (!valid_pair(n, l)) throw std::invalid_argument("zernike_radial: invalid (n, l)");
    const int la = std::abs(l);
    double acc = 0.0;
    for (int s = 0; s <= (n - la) / 2; ++s) {
        double num = 1.0;
        for (int k = 2; k <= n - s; ++k) num *= k;  // (n-s)!
        double den = 1.0;
        for (int k = 2; k <= s; ++k) den *= k;
        for (int k = 2; k <= (n + la) / 2 - s; ++k) den *= k;
        for (int k = 2; k <= (n - la) / 2 - s; ++k) den *= k;
        double term = num / den * std::pow(r, n - 2 * s);
        acc += (s % 2 == 0) ? term : -term;
    }
    return acc;
}

std::complex<double> ZernikeTable::at(int n, int l) const {
    if (!valid_pair(n, l)) throw std::invalid_argument("ZernikeTable: invalid (n, l) request");
    auto it = entries.find({n, l});
    if (it == entries.end()) throw std::invalid_argument("ZernikeTable: order exceeds table");
    return it->second;
}

ZernikeTable zernike_moments(const GrayImage& patch, int n_max) {
    if (patch.width != patch.height) throw std::invalid_argument("zernike_moments: patch must be square");
    if (n_max < 0) throw std::invalid_argument("zernike_moments: n_max must be >= 0");

    ZernikeTable table;
    table.n_max = n_max;
    std::vector<std::pair<int, int>> pairs;
    for (int n = 0; n <= n_max; ++n)
        for (int l = -n; l <= n; ++l)
            if (valid_pair(n, l)) pairs.push_back({n, l});
    std::vector<std::complex<double>> acc(pairs.size(), {0.0, 0.0});

    const int s = patch.width;
    const double da = 4.0 / (static_cast<double>(s) * s);  // pixel area in disk coordinates
    std::vector<double> rpow(static_cast<size_t>(n_max) + 1);
    std::vector<double> cosl(static_cast<size_t>(n_max) + 1), sinl(static_cast<size_t>(n_max) + 1);

    for (int i = 0; i < s; ++i) {
        const double y = (s - 1.0 - 2.0 * i) / s;
        for (int j = 0; j < s; ++j) {
            const double x = (2.0 * j + 1.0 - s) / s;
            const double r = std::sqrt(x * x + y * y);
            if (r > 1.0) continue;
            const double theta = std::atan2(y, x);
            const double f = patch.at(j, i);

            rpow[0] = 1.0;
            for (int k = 1; k <= n_max; ++k) rpow[k] = rpow[k - 1] * r;
            for (int k = 0; k <= n_max; ++k) {
                cosl[k] = std::cos(k * theta);
                sinl[k] = std::sin(k * theta);
            }

            for (size_t p = 0; p < pairs.size(); ++p) {
                const int n = pairs[p].first, l = pairs[p].second;
                const int la = std::abs(l);
                double radial = 0.0;
                for (int q = 0; q <= (n - la) / 2; ++q) {
                    double num = 1.0;
                    for (int k = 2; k <= n - q; ++k) num *= k;
                    double den = 1.0;
                    for (int k = 2; k <= q; ++k) den *= k;
                    for (int k = 2; k <= (n + la) / 2 - q; ++k) den *= k;
                    for (int k = 2; k <= (n - la) / 2 - q; ++k) den *= k;
                    double term = num / den * rpow[n - 2 * q];
                    radial += (q % 2 == 0) ? term : -term;
                }
                // conj(V_nl) = R_nl(r) e^{-i l theta}
                double si = l >= 0 ? -sinl[la] : sinl[la];
                acc[p] += std::complex<double>(radial * cosl[la], radial * si) * (f * da);
            }
        }
    }
    for (size_t p = 0; p < pairs.size(); ++p)
        table.entries[pairs[p]] = acc[p] * ((pairs[p].first + 1.0) / kPi);
    return table;
}

FloatImage zernike_reconstruct(const ZernikeTable& table, int size) {
    if (size < 1) throw std::invalid_argument("zernike_reconstruct: size must be >= 1");
    FloatImage out(size, size, 0.0);
    for (int i = 0; i < size; ++i) {
        const double y = (size - 1.0 - 2.0 * i) / size;
        for (int j = 0; j < size; ++j) {
            const double x = (2.0 * j + 1.0 - size) / size;
            const double r = std::sqrt(x * x + y * y);
            if (r > 1.0) continue;
            const double theta = std::atan2(y, x);
            std::complex<double> sum{0.0, 0.0};
            for (const auto& [nl, a] : table.entries) {
                double radial = zernike_radial(nl.first, nl.second, r);
                double lt = nl.second * theta;
                sum += a * std::complex<double>(radial * std::cos(lt), radial * std::sin(lt));
            }
            out.at(j, i) = sum.real();
        }
    }
    return out;
}

size_t feature_length(const FeatureSchema& schema) {
    size_t zernike = 0;
    for (int n = 0; n <= schema.zernike_n_max; ++n) zernike += static_cast<size_t>(n / 2) + 1;
    return 4u * schema.block_grid * schema.block_grid + 4u + zernike;
}

std::vector<double> build_feature_vector(const FeatureMap& lum, const FeatureMap& density,
                                         const FeatureMap& thickness, const FeatureMap& orientation,
                                         const TextureStats& stats, const ZernikeTable& zernike,
                                         const FeatureSchema& schema) {
    const FeatureMap* maps[] = {&lum, &density, &thickness, &orientation};
    const int w = lum.width, h = lum.height;
    for (const FeatureMap* m : maps)
        if (m->width != w || m->height != h)
            throw std::invalid_argument("build_feature_vector: map dimensions differ");
    const int g = schema.block_grid;
    if (g < 1 || w < g || h < g)
        throw std::invalid_argument("build_feature_vector: block grid exceeds image");
    if (zernike.n_max < schema.zernike_n_max)
        throw std::invalid_argument("build_feature_vector: zernike table shallower than schema");

    std::vector<double> out;
    out.reserve(feature_length(schema));

    // block boundaries at floor(k*dim/G), giving G near-equal strips
    for (const FeatureMap* m : maps) {
        for (int by = 0; by < g; ++by) {
            int y0 = static_cast<int>(static_cast<long>(by) * h / g);
            int y1 = static_cast<int>(static_cast<long>(by + 1) * h / g);
            for (int bx = 0; bx < g; ++bx) {
                int x0 = static_cast<int>(static_cast<long>(bx) * w / g);
                int x1 = static_cast<int>(static_cast<long>(bx + 1) * w / g);
                double acc = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) acc += m->at(x, y);
                out.push_back(acc / (static_cast<double>(y1 - y0) * (x1 - x0)));
            }
        }
    }

    out.push_back(stats.mean);
    out.push_back(stats.variance);
    out.push_back(stats.skewness);
    out.push_back(stats.entropy);

    for (int n = 0; n <= schema.zernike_n_max; ++n)
        for (int l = n % 2; l <= n; l += 2) out.push_back(std::abs(zernike.at(n, l)));

    return out;
}

}  // namespace retina
