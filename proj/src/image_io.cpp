#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "uwimg/image.hpp"

namespace uwimg {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

ImageBuf from_rgb8(const std::vector<unsigned char>& rgb, int w, int h) {
    ImageBuf img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.r[i] = rgb[3 * i + 0] / 255.0;
        img.g[i] = rgb[3 * i + 1] / 255.0;
        img.b[i] = rgb[3 * i + 2] / 255.0;
    }
    return img;
}

std::vector<unsigned char> to_rgb8(const ImageBuf& img) {
    std::vector<unsigned char> rgb(img.pixel_count() * 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        rgb[3 * i + 0] = quantize8(img.r[i]);
        rgb[3 * i + 1] = quantize8(img.g[i]);
        rgb[3 * i + 2] = quantize8(img.b[i]);
    }
    return rgb;
}

// --- PNG ---------------------------------------------------------------

ImageBuf load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(path, "cannot open file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "libpng init failed");
    }

    std::vector<unsigned char> rgb;
    std::vector<png_bytep> rows;
    int w = 0, h = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "corrupt or unsupported PNG");
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    if (w <= 0 || h <= 0) longjmp(png_jmpbuf(png), 1);

    // Normalize every variant to 8-bit RGB.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    const auto color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(w) * 3)
        longjmp(png_jmpbuf(png), 1);

    rgb.resize(static_cast<std::size_t>(w) * h * 3);
    rows.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = rgb.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    return from_rgb8(rgb, w, h);
}

void save_png(const ImageBuf& img, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(path, "cannot open file for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "libpng init failed");
    }

    std::vector<unsigned char> rgb = to_rgb8(img);
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] = rgb.data() + static_cast<std::size_t>(y) * img.width * 3;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG write failed");
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// --- PPM (binary P6, maxval 255) ----------------------------------------

// Skip whitespace and '#' comment lines between header tokens.
void skip_ppm_space(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

ImageBuf load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");

    char magic[2] = {};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '6') fail(path, "not a binary PPM (P6)");

    long w = 0, h = 0, maxval = 0;
    skip_ppm_space(in);
    in >> w;
    skip_ppm_space(in);
    in >> h;
    skip_ppm_space(in);
    in >> maxval;
    if (!in || w <= 0 || h <= 0) fail(path, "malformed PPM header");
    if (maxval != 255) fail(path, "unsupported PPM maxval (expected 255)");
    in.get();  // single whitespace byte before the payload

    std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (static_cast<std::size_t>(in.gcount()) != rgb.size()) fail(path, "truncated PPM payload");

    return from_rgb8(rgb, static_cast<int>(w), static_cast<int>(h));
}

void save_ppm(const ImageBuf& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open file for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    const std::vector<unsigned char> rgb = to_rgb8(img);
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!out) fail(path, "PPM write failed");
}

bool ends_with_ci(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) ==
               std::tolower(static_cast<unsigned char>(b));
    });
}

}  // namespace

ImageBuf load_image(const std::string& path) {
    // Dispatch on content, not extension: read the first bytes and sniff.
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail(path, "cannot open file");
    unsigned char head[8] = {};
    probe.read(reinterpret_cast<char*>(head), 8);
    const auto got = probe.gcount();
    probe.close();

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (got >= 8 && std::equal(png_sig, png_sig + 8, head)) return load_png(path);
    if (got >= 2 && head[0] == 'P' && head[1] == '6') return load_ppm(path);
    fail(path, "unrecognized image format (PNG or binary PPM expected)");
}

void save_image(const ImageBuf& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("save_image: empty image");
    if (ends_with_ci(path, ".png"))
        save_png(img, path);
    else if (ends_with_ci(path, ".ppm"))
        save_ppm(img, path);
    else
        fail(path, "unsupported output extension (use .png or .ppm)");
}

}  // namespace uwimg
