#include "retina/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace retina {

ColorImage::ColorImage(int w, int h, Rgb fill)
    : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

FloatImage::FloatImage(int w, int h, double fill)
    : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

BinaryMask::BinaryMask(int w, int h, bool fill)
    : width(w), height(h), bits(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

std::uint8_t GrayImage::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

double FloatImage::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

size_t BinaryMask::count() const {
    size_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

namespace {

// Netpbm header token: skips whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') tok.push_back(static_cast<char>(c));
    if (c == '#') in.unget();
    return tok;
}

int parse_dim(const std::string& tok, const std::string& path, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw FormatError(path + ": bad " + what + " field '" + tok + "'");
    long v = std::stol(tok);
    if (v < 1 || v > 1 << 20) throw FormatError(path + ": unsupported " + what + " " + tok);
    return static_cast<int>(v);
}

struct PnmHeader {
    int width;
    int height;
};

// Validates magic and maxval (must be 255), positions the stream at pixel data.
PnmHeader read_header(std::istream& in, const std::string& path, const char* magic) {
    std::string m = next_token(in);
    if (m != magic) throw FormatError(path + ": expected " + magic + " header, got '" + m + "'");
    PnmHeader h;
    h.width = parse_dim(next_token(in), path, "width");
    h.height = parse_dim(next_token(in), path, "height");
    std::string maxval = next_token(in);
    if (maxval != "255") throw FormatError(path + ": maxval must be 255, got '" + maxval + "'");
    return h;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileOpenError(path + ": cannot open for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileOpenError(path + ": cannot open for writing");
    return out;
}

}  // namespace

ColorImage load_ppm(const std::string& path) {
    std::ifstream in = open_input(path);
    PnmHeader h = read_header(in, path, "P6");
    ColorImage img(h.width, h.height);
    size_t bytes = static_cast<size_t>(h.width) * h.height * 3;
    std::vector<char> buf(bytes);
    in.read(buf.data(), static_cast<std::streamsize>(bytes));
    if (static_cast<size_t>(in.gcount()) != bytes)
        throw TruncatedDataError(path + ": pixel data ends early (" + std::to_string(in.gcount()) +
                                 " of " + std::to_string(bytes) + " bytes)");
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        img.pixels[i].r = static_cast<std::uint8_t>(buf[3 * i]);
        img.pixels[i].g = static_cast<std::uint8_t>(buf[3 * i + 1]);
        img.pixels[i].b = static_cast<std::uint8_t>(buf[3 * i + 2]);
    }
    return img;
}

void save_ppm(const ColorImage& img, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<char> buf(img.pixels.size() * 3);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        buf[3 * i] = static_cast<char>(img.pixels[i].r);
        buf[3 * i + 1] = static_cast<char>(img.pixels[i].g);
        buf[3 * i + 2] = static_cast<char>(img.pixels[i].b);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FileOpenError(path + ": write failed");
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream in = open_input(path);
    PnmHeader h = read_header(in, path, "P5");
    GrayImage img(h.width, h.height);
    size_t bytes = static_cast<size_t>(h.width) * h.height;
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<size_t>(in.gcount()) != bytes)
        throw TruncatedDataError(path + ": pixel data ends early (" + std::to_string(in.gcount()) +
                                 " of " + std::to_string(bytes) + " bytes)");
    return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw FileOpenError(path + ": write failed");
}

BinaryMask load_mask(const std::string& path) {
    GrayImage g = load_pgm(path);
    BinaryMask m(g.width, g.height);
    for (size_t i = 0; i < g.pixels.size(); ++i) m.bits[i] = g.pixels[i] != 0;
    return m;
}

void save_mask(const BinaryMask& mask, const std::string& path) {
    GrayImage g(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) g.pixels[i] = mask.bits[i] ? 255 : 0;
    save_pgm(g, path);
}

void split_channels(const ColorImage& img, GrayImage& r, GrayImage& g, GrayImage& b) {
    r = GrayImage(img.width, img.height);
    g = GrayImage(img.width, img.height);
    b = GrayImage(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        r.pixels[i] = img.pixels[i].r;
        g.pixels[i] = img.pixels[i].g;
        b.pixels[i] = img.pixels[i].b;
    }
}

ColorImage merge_channels(const GrayImage& r, const GrayImage& g, const GrayImage& b) {
    if (r.width != g.width || r.width != b.width || r.height != g.height || r.height != b.height)
        throw std::invalid_argument("merge_channels: plane dimensions differ");
    ColorImage img(r.width, r.height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = {r.pixels[i], g.pixels[i], b.pixels[i]};
    return img;
}

GrayImage to_gray(const ColorImage& img, GrayMode mode) {
    GrayImage out(img.width, img.height);
    if (mode == GrayMode::Green) {
        for (size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = img.pixels[i].g;
    } else {
        for (size_t i = 0; i < img.pixels.size(); ++i) {
            const Rgb& p = img.pixels[i];
            double y = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
            out.pixels[i] = static_cast<std::uint8_t>(std::lround(y));
        }
    }
    return out;
}

BlockGrid partition_blocks(int width, int height, int block_width, int block_height) {
    if (block_width < 1 || block_height < 1)
        throw std::invalid_argument("partition_blocks: block dimensions must be >= 1");
    BlockGrid grid;
    grid.block_width = block_width;
    grid.block_height = block_height;
    for (int y = 0; y < height; y += block_height)
        for (int x = 0; x < width; x += block_width)
            grid.blocks.push_back(
                {x, y, std::min(block_width, width - x), std::min(block_height, height - y)});
    return grid;
}

}  // namespace retina
