#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <png.h>

#include "hmerw/image.hpp"

using namespace hmerw;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "hmerw_image_tests";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

void write_pgm_bytes(const fs::path& path, int rows, int cols,
                     const std::vector<uint8_t>& bytes, int maxval = 255) {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n" << cols << " " << rows << "\n" << maxval << "\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void write_png_gray(const fs::path& path, int rows, int cols,
                    const std::vector<uint8_t>& bytes, int bit_depth = 8,
                    int color_type = PNG_COLOR_TYPE_GRAY) {
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, cols, rows, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const int stride = cols * channels * (bit_depth / 8);
    for (int r = 0; r < rows; ++r)
        png_write_row(png, const_cast<png_bytep>(bytes.data() + static_cast<size_t>(r) * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

// Independent brute-force oracle for the 2x2 mean filter.
GrayImage naive_mean_filter(const GrayImage& img) {
    GrayImage out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c) {
            double sum = 0.0;
            int cnt = 0;
            for (int dr = 0; dr <= 1; ++dr)
                for (int dc = 0; dc <= 1; ++dc)
                    if (img.in_bounds(r + dr, c + dc)) {
                        sum += img.at(r + dr, c + dc);
                        ++cnt;
                    }
            out.at(r, c) = sum / cnt;
        }
    return out;
}

GrayImage random_image(int rows, int cols, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    GrayImage img(rows, cols);
    for (double& v : img.data) v = u(rng);
    return img;
}

}  // namespace

TEST_CASE("PGM round trip preserves bytes exactly") {
    const fs::path p = temp_dir() / "tiny.pgm";
    write_pgm_bytes(p, 2, 2, {0, 255, 10, 20});
    const GrayImage img = load_image(p.string());
    REQUIRE(img.rows == 2);
    REQUIRE(img.cols == 2);
    REQUIRE(img.data == std::vector<double>{0, 255, 10, 20});
}

TEST_CASE("PGM 1x1 identity case") {
    const fs::path p = temp_dir() / "one.pgm";
    write_pgm_bytes(p, 1, 1, {7});
    const GrayImage img = load_image(p.string());
    REQUIRE(img.rows == 1);
    REQUIRE(img.cols == 1);
    REQUIRE(img.data[0] == 7.0);
}

TEST_CASE("PGM with comments and odd whitespace parses") {
    const fs::path p = temp_dir() / "comment.pgm";
    std::ofstream out(p, std::ios::binary);
    out << "P5 # magic\n# a comment line\n 3\t1 # dims\n255\n";
    const std::vector<uint8_t> bytes{1, 2, 3};
    out.write(reinterpret_cast<const char*>(bytes.data()), 3);
    out.close();
    const GrayImage img = load_image(p.string());
    REQUIRE(img.rows == 1);
    REQUIRE(img.cols == 3);
    REQUIRE(img.data == std::vector<double>{1, 2, 3});
}

TEST_CASE("16-bit PGM rejected naming bit depth") {
    const fs::path p = temp_dir() / "deep.pgm";
    write_pgm_bytes(p, 1, 1, {0, 7}, 65535);
    REQUIRE_THROWS_WITH(load_image(p.string()), Catch::Matchers::ContainsSubstring("bit depth"));
}

TEST_CASE("ASCII PGM (P2) rejected") {
    const fs::path p = temp_dir() / "ascii.pgm";
    std::ofstream out(p);
    out << "P2\n1 1\n255\n7\n";
    out.close();
    REQUIRE_THROWS_WITH(load_image(p.string()), Catch::Matchers::ContainsSubstring("P5"));
}

TEST_CASE("missing file error names the path") {
    REQUIRE_THROWS_WITH(load_image("/nonexistent/nowhere.pgm"),
                        Catch::Matchers::ContainsSubstring("nowhere.pgm"));
}

TEST_CASE("truncated PGM raster rejected") {
    const fs::path p = temp_dir() / "short.pgm";
    write_pgm_bytes(p, 4, 4, {1, 2, 3});  // 13 bytes missing
    REQUIRE_THROWS_WITH(load_image(p.string()), Catch::Matchers::ContainsSubstring("truncated"));
}

TEST_CASE("8-bit grayscale PNG loads byte-exact") {
    const fs::path p = temp_dir() / "gray.png";
    write_png_gray(p, 2, 3, {0, 10, 20, 30, 128, 255});
    const GrayImage img = load_image(p.string());
    REQUIRE(img.rows == 2);
    REQUIRE(img.cols == 3);
    REQUIRE(img.data == std::vector<double>{0, 10, 20, 30, 128, 255});
}

TEST_CASE("16-bit PNG rejected naming bit depth") {
    const fs::path p = temp_dir() / "deep.png";
    std::vector<uint8_t> bytes(2 * 2 * 2, 0);
    write_png_gray(p, 2, 2, bytes, 16);
    REQUIRE_THROWS_WITH(load_image(p.string()), Catch::Matchers::ContainsSubstring("bit depth"));
}

TEST_CASE("RGB PNG rejected as multi-channel") {
    const fs::path p = temp_dir() / "rgb.png";
    std::vector<uint8_t> bytes(2 * 2 * 3, 50);
    write_png_gray(p, 2, 2, bytes, 8, PNG_COLOR_TYPE_RGB);
    REQUIRE_THROWS_WITH(load_image(p.string()),
                        Catch::Matchers::ContainsSubstring("multi-channel"));
}

TEST_CASE("mean filter: direct evaluation of the window rule") {
    GrayImage img(2, 2);
    img.at(0, 0) = 0;
    img.at(0, 1) = 0;
    img.at(1, 0) = 0;
    img.at(1, 1) = 4;
    const GrayImage f = mean_filter_2x2(img);
    REQUIRE(f.at(0, 0) == 1.0);
    REQUIRE(f.at(0, 1) == 2.0);
    REQUIRE(f.at(1, 0) == 2.0);
    REQUIRE(f.at(1, 1) == 4.0);
}

TEST_CASE("mean filter: constant image is a fixed point") {
    GrayImage img(5, 7, 5.0);
    const GrayImage f = mean_filter_2x2(img);
    for (double v : f.data) REQUIRE(v == 5.0);
    // Idempotence on the already-filtered result.
    const GrayImage ff = mean_filter_2x2(f);
    REQUIRE(ff.data == f.data);
}

TEST_CASE("mean filter matches brute-force oracle elementwise") {
    const GrayImage img = random_image(64, 64, 42);
    const GrayImage got = mean_filter_2x2(img);
    const GrayImage want = naive_mean_filter(img);
    for (size_t i = 0; i < img.size(); ++i) REQUIRE(got.data[i] == want.data[i]);
}

TEST_CASE("mean filter output bounded by input range") {
    const GrayImage img = random_image(33, 17, 7);
    const auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
    const GrayImage f = mean_filter_2x2(img);
    for (double v : f.data) {
        REQUIRE(v >= *mn);
        REQUIRE(v <= *mx);
    }
}

TEST_CASE("mean filter commutes with positive scaling") {
    const GrayImage img = random_image(20, 20, 99);
    const double alpha = 2.5;
    GrayImage scaled = img;
    for (double& v : scaled.data) v *= alpha;
    const GrayImage fs = mean_filter_2x2(scaled);
    const GrayImage f = mean_filter_2x2(img);
    for (size_t i = 0; i < img.size(); ++i)
        REQUIRE(fs.data[i] == Catch::Approx(alpha * f.data[i]).epsilon(1e-12));
}

TEST_CASE("normalized PGM writer quantizes round-half-up") {
    const fs::path p = temp_dir() / "norm.pgm";
    // min 0, max 2 -> levels {0, 127.5, 255} -> round half up {0, 128, 255}
    write_pgm_normalized(p.string(), {0.0, 1.0, 2.0, 2.0}, 2, 2);
    const GrayImage img = load_image(p.string());
    REQUIRE(img.data == std::vector<double>{0, 128, 255, 255});
}

TEST_CASE("normalized PGM writer handles constant maps") {
    const fs::path p = temp_dir() / "const.pgm";
    write_pgm_normalized(p.string(), {3.0, 3.0}, 1, 2);
    const GrayImage img = load_image(p.string());
    REQUIRE(img.data == std::vector<double>{0, 0});
}
