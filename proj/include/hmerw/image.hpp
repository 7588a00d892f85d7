#pragma once

// Grayscale image container, PGM/PNG ingestion and the 2x2 mean prefilter.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace hmerw {

// Dense row-major grayscale field. Intensities are 8-bit levels kept as
// reals in [0, 255]; no rescaling happens anywhere in the pipeline.
struct GrayImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {
        if (r <= 0 || c <= 0)
            throw std::invalid_argument("GrayImage: dimensions must be positive");
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return data.size(); }
    bool in_bounds(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
};

namespace detail {

// One header token, skipping whitespace and '#' comments per the PGM spec.
inline std::string pnm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
        } else if (!std::isspace(ch)) {
            tok.push_back(static_cast<char>(ch));
            while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#')
                tok.push_back(static_cast<char>(in.get()));
            return tok;
        }
    }
    throw std::runtime_error("PGM: truncated header");
}

inline long pnm_int(std::istream& in) {
    const std::string tok = pnm_token(in);
    size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(tok, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("PGM: malformed header field '" + tok + "'");
    }
    if (pos != tok.size())
        throw std::runtime_error("PGM: malformed header field '" + tok + "'");
    return v;
}

inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5')
        throw std::runtime_error(path + ": not a binary PGM (P5) file");

    const long cols = pnm_int(in);
    const long rows = pnm_int(in);
    const long maxval = pnm_int(in);
    if (cols <= 0 || rows <= 0)
        throw std::runtime_error(path + ": non-positive PGM dimensions");
    if (maxval > 255)
        throw std::runtime_error(path + ": unsupported bit depth (maxval " +
                                 std::to_string(maxval) + " exceeds 8-bit)");
    if (maxval <= 0)
        throw std::runtime_error(path + ": invalid PGM maxval");
    in.get();  // single whitespace separating header from raster

    GrayImage img(static_cast<int>(rows), static_cast<int>(cols));
    std::vector<uint8_t> raw(img.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size())
        throw std::runtime_error(path + ": truncated PGM raster");
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i];
    return img;
}

struct PngReadGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadGuard() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

inline GrayImage load_png(const std::string& path) {
    PngReadGuard g;
    g.fp = std::fopen(path.c_str(), "rb");
    if (!g.fp) throw std::runtime_error("cannot open file: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, g.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw std::runtime_error(path + ": not a PNG file");

    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!g.png) throw std::runtime_error("libpng init failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(g.png)))
        throw std::runtime_error(path + ": PNG decode error");

    png_init_io(g.png, g.fp);
    png_set_sig_bytes(g.png, 8);
    png_read_info(g.png, g.info);

    const png_byte depth = png_get_bit_depth(g.png, g.info);
    const png_byte color = png_get_color_type(g.png, g.info);
    if (color != PNG_COLOR_TYPE_GRAY)
        throw std::runtime_error(path + ": multi-channel input (PNG color type " +
                                 std::to_string(color) + "), expected 8-bit grayscale");
    if (depth != 8)
        throw std::runtime_error(path + ": unsupported bit depth (" +
                                 std::to_string(depth) + "), expected 8");

    const png_uint_32 w = png_get_image_width(g.png, g.info);
    const png_uint_32 h = png_get_image_height(g.png, g.info);
    GrayImage img(static_cast<int>(h), static_cast<int>(w));
    std::vector<uint8_t> row(w);
    png_set_interlace_handling(g.png);
    png_read_update_info(g.png, g.info);
    for (png_uint_32 r = 0; r < h; ++r) {
        png_read_row(g.png, row.data(), nullptr);
        for (png_uint_32 c = 0; c < w; ++c)
            img.data[static_cast<size_t>(r) * w + c] = row[c];
    }
    return img;
}

}  // namespace detail

// Loads an 8-bit grayscale PGM (binary P5) or PNG. Pixel values are kept
// byte-exact; anything else is rejected with the offending property named.
inline GrayImage load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open file: " + path);
    char m0 = 0;
    probe.get(m0);
    probe.close();
    if (m0 == 'P') return detail::load_pgm(path);
    if (static_cast<unsigned char>(m0) == 0x89) return detail::load_png(path);
    throw std::runtime_error(path + ": unrecognized image format (expected PGM P5 or PNG)");
}

// Writes a real-valued map as PGM P5 after min-max normalization to [0,255],
// quantized round-half-up. A constant map writes as all zeros.
inline void write_pgm_normalized(const std::string& path, const std::vector<double>& values,
                                 int rows, int cols) {
    if (rows <= 0 || cols <= 0 || values.size() != static_cast<size_t>(rows) * cols)
        throw std::invalid_argument("write_pgm_normalized: dimension mismatch");
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;
    const double span = mx - mn;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "P5\n" << cols << " " << rows << "\n255\n";
    std::vector<uint8_t> raw(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        const double v = span > 0 ? (values[i] - mn) / span * 255.0 : 0.0;
        raw[i] = static_cast<uint8_t>(std::floor(v + 0.5));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_pgm_normalized(const std::string& path, const GrayImage& img) {
    write_pgm_normalized(path, img.data, img.rows, img.cols);
}

// 2x2 mean smoothing, anchored at the top-left pixel. Windows falling off
// the bottom/right borders shrink; output dimensions match the input.
inline GrayImage mean_filter_2x2(const GrayImage& img) {
    GrayImage out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r) {
        const int rEnd = std::min(r + 2, img.rows);
        for (int c = 0; c < img.cols; ++c) {
            const int cEnd = std::min(c + 2, img.cols);
            double sum = 0.0;
            int cnt = 0;
            for (int rr = r; rr < rEnd; ++rr)
                for (int cc = c; cc < cEnd; ++cc) {
                    sum += img.at(rr, cc);
                    ++cnt;
                }
            out.at(r, c) = sum / cnt;
        }
    }
    return out;
}

}  // namespace hmerw
