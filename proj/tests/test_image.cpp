#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "support/testutil.hpp"
#include "uwimg/evalkit.hpp"
#include "uwimg/image.hpp"

using namespace uwimg;
using testutil::TempDir;
using testutil::make_image;
using testutil::make_map;

TEST_CASE("quantize8 rounds half up and clamps") {
    CHECK(quantize8(0.0) == 0);
    CHECK(quantize8(1.0) == 255);
    CHECK(quantize8(0.5) == 128);  // 127.5 rounds up
    CHECK(quantize8(127.0 / 255.0) == 127);
    CHECK(quantize8(0.001) == 0);    // 0.255 rounds down
    CHECK(quantize8(0.002) == 1);    // 0.51 rounds up
    CHECK(quantize8(-0.25) == 0);    // clamp floor
    CHECK(quantize8(1.25) == 255);   // clamp ceiling
    for (int k = 0; k < 256; ++k)    // 8-bit grid is a fixed point
        CHECK(quantize8(k / 255.0) == k);
}

TEST_CASE("ppm round trip preserves every byte") {
    TempDir dir;
    const ImageBuf img = random_image(37, 23, 99);
    const std::string path = dir.file("rt.ppm");
    save_image(img, path);
    const ImageBuf back = load_image(path);
    CHECK(testutil::bitwise_equal(img, back));
}

TEST_CASE("png round trip preserves every byte") {
    TempDir dir;
    const ImageBuf img = random_image(41, 19, 7);
    const std::string path = dir.file("rt.png");
    save_image(img, path);
    const ImageBuf back = load_image(path);
    CHECK(testutil::bitwise_equal(img, back));
}

TEST_CASE("format is sniffed from content, not extension") {
    TempDir dir;
    const ImageBuf img = random_image(8, 8, 3);
    const std::string path = dir.file("actually_png.ppm");
    {
        // Write PNG bytes under a .ppm name by saving then renaming.
        save_image(img, dir.file("tmp.png"));
        std::filesystem::rename(dir.file("tmp.png"), path);
    }
    CHECK(testutil::bitwise_equal(img, load_image(path)));
}

TEST_CASE("1x1 ppm decodes to scaled intensities") {
    TempDir dir;
    testutil::write_bytes(dir.file("one.ppm"), std::string("P6\n1 1\n255\n") +
                                                   '\xff' + '\x00' + '\x00');
    const ImageBuf img = load_image(dir.file("one.ppm"));
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    CHECK(img.r[0] == doctest::Approx(1.0));
    CHECK(img.g[0] == doctest::Approx(0.0));
    CHECK(img.b[0] == doctest::Approx(0.0));
}

TEST_CASE("ppm header comments and whitespace are tolerated") {
    TempDir dir;
    testutil::write_bytes(dir.file("c.ppm"),
                          std::string("P6 # format\n# a comment line\n 2 # width\n"
                                      "1\n255\n") +
                              std::string(6, '\x80'));
    const ImageBuf img = load_image(dir.file("c.ppm"));
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.r[0] == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("image loading failures are descriptive") {
    TempDir dir;
    CHECK_THROWS_AS(load_image(dir.file("missing.png")), std::runtime_error);

    testutil::write_bytes(dir.file("bad_magic.ppm"), "P3\n1 1\n255\n1 2 3\n");
    CHECK_THROWS_AS(load_image(dir.file("bad_magic.ppm")), std::runtime_error);

    testutil::write_bytes(dir.file("deep.ppm"), "P6\n1 1\n65535\n abcdef");
    CHECK_THROWS_AS(load_image(dir.file("deep.ppm")), std::runtime_error);

    testutil::write_bytes(dir.file("short.ppm"), std::string("P6\n2 2\n255\n") + "abc");
    CHECK_THROWS_AS(load_image(dir.file("short.ppm")), std::runtime_error);

    testutil::write_bytes(dir.file("trunc.png"), "\x89PNG\r\n\x1a\n garbage");
    CHECK_THROWS_AS(load_image(dir.file("trunc.png")), std::runtime_error);
}

TEST_CASE("save rejects unknown extensions") {
    TempDir dir;
    const ImageBuf img(2, 2, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(save_image(img, dir.file("out.jpg")), std::runtime_error);
    CHECK_THROWS_AS(save_image(img, dir.file("no_extension")), std::runtime_error);
}

TEST_CASE("grayscale png round trips through gray_image") {
    TempDir dir;
    const ScalarMap map = testutil::rand_map(13, 9, 21);
    save_image(gray_image(map), dir.file("gray.png"));
    const ImageBuf back = load_image(dir.file("gray.png"));
    CHECK(back.r == back.g);
    CHECK(back.g == back.b);
    // 8-bit quantization is the only loss permitted
    for (std::size_t i = 0; i < map.size(); ++i)
        CHECK(std::abs(back.r[i] - map.values[i]) <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("trimmed stats: constant plane") {
    const std::vector<double> plane(40, 0.5);
    const ChannelStats s = trimmed_channel_stats(plane, 0.10);
    CHECK(s.avg == doctest::Approx(127.5).epsilon(1e-12));
    CHECK(s.med == doctest::Approx(127.5).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("trimmed stats: ten-point hand oracle") {
    std::vector<double> plane;
    for (int i = 0; i < 10; ++i) plane.push_back(i / 10.0);
    std::shuffle(plane.begin(), plane.end(), std::mt19937_64(5));
    const ChannelStats s = trimmed_channel_stats(plane, 0.10);
    // middle 8 of {0, 0.1, ..., 0.9} scaled by 255
    CHECK(s.avg == doctest::Approx(114.75).epsilon(1e-12));
    CHECK(s.med == doctest::Approx(114.75).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(58.427840110686965).epsilon(1e-12));
}

TEST_CASE("trimmed stats: trim zero equals plain statistics") {
    const ScalarMap m = testutil::rand_map(31, 17, 11);
    const ChannelStats s = trimmed_channel_stats(m.values, 0.0);

    const double n = static_cast<double>(m.size());
    double mean = 0.0;
    for (double v : m.values) mean += v * 255.0;
    mean /= n;
    double var = 0.0;
    for (double v : m.values) var += (v * 255.0 - mean) * (v * 255.0 - mean);
    var /= n;
    std::vector<double> sorted = m.values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = sorted.size() / 2;
    const double med = 255.0 * (sorted.size() % 2 ? sorted[half]
                                                  : (sorted[half - 1] + sorted[half]) / 2);

    CHECK(s.avg == doctest::Approx(mean).epsilon(1e-9));
    CHECK(s.med == doctest::Approx(med).epsilon(1e-9));
    CHECK(s.std == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
}

TEST_CASE("trimmed stats: 8-bit grid data matches an independent sort oracle") {
    // Values on the k/255 grid take the histogram path; the oracle sorts.
    const ImageBuf img = random_image(53, 37, 1234);
    for (const auto* plane : {&img.r, &img.g, &img.b}) {
        const ChannelStats s = trimmed_channel_stats(*plane, 0.10);

        std::vector<double> sorted(*plane);
        std::sort(sorted.begin(), sorted.end());
        const std::size_t cut = static_cast<std::size_t>(0.10 * sorted.size());
        const std::vector<double> mid(sorted.begin() + cut, sorted.end() - cut);
        double mean = 0.0;
        for (double v : mid) mean += v * 255.0;
        mean /= static_cast<double>(mid.size());
        double var = 0.0;
        for (double v : mid) var += (v * 255.0 - mean) * (v * 255.0 - mean);
        var /= static_cast<double>(mid.size());
        const std::size_t half = mid.size() / 2;
        const double med =
            255.0 * (mid.size() % 2 ? mid[half] : (mid[half - 1] + mid[half]) / 2);

        CHECK(s.avg == doctest::Approx(mean).epsilon(1e-9));
        CHECK(s.med == doctest::Approx(med).epsilon(1e-9));
        CHECK(s.std == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
    }
}

TEST_CASE("trimmed stats: permutation invariance on grid data") {
    const ImageBuf img = random_image(24, 16, 77);
    std::vector<double> shuffled = img.g;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(3));
    const ChannelStats a = trimmed_channel_stats(img.g, 0.10);
    const ChannelStats b = trimmed_channel_stats(shuffled, 0.10);
    CHECK(a.avg == b.avg);
    CHECK(a.med == b.med);
    CHECK(a.std == b.std);
}

TEST_CASE("trimmed stats: domain errors") {
    const std::vector<double> plane(4, 0.1);
    CHECK_THROWS_AS(trimmed_channel_stats(std::vector<double>{}, 0.10),
                    std::invalid_argument);
    CHECK_THROWS_AS(trimmed_channel_stats(plane, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(trimmed_channel_stats(plane, -0.1), std::invalid_argument);
}

TEST_CASE("trimmed stats: single element") {
    const std::vector<double> plane{0.4};
    const ChannelStats s = trimmed_channel_stats(plane, 0.10);
    CHECK(s.avg == doctest::Approx(102.0).epsilon(1e-12));
    CHECK(s.med == doctest::Approx(102.0).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("histogram stretch: linear ramp maps onto the target range") {
    ScalarMap ramp(101, 1);
    for (int i = 0; i <= 100; ++i) ramp.values[i] = i / 100.0;
    const ScalarMap out = histogram_stretch(ramp, 0.0, 0.1, 0.9);
    CHECK(out.values.front() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(out.values.back() == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(out.values[50] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("histogram stretch: constant map becomes the midpoint") {
    const ScalarMap m(9, 7, 0.42);
    const ScalarMap out = histogram_stretch(m);
    for (double v : out.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("histogram stretch: two-value map hits the endpoints") {
    ScalarMap m(10, 1);
    for (int i = 0; i < 10; ++i) m.values[i] = (i < 5) ? 0.2 : 0.8;
    const ScalarMap out = histogram_stretch(m, 0.0, 0.1, 0.9);
    for (int i = 0; i < 10; ++i)
        CHECK(out.values[i] == doctest::Approx(i < 5 ? 0.1 : 0.9).epsilon(1e-12));
}

TEST_CASE("histogram stretch: output bounded and monotone") {
    const ScalarMap m = testutil::rand_map(40, 30, 17);
    const ScalarMap out = histogram_stretch(m);
    for (double v : out.values) {
        CHECK(v >= 0.1);
        CHECK(v <= 0.9);
    }
    // monotone: sort both by input value; outputs must be non-decreasing
    std::vector<std::size_t> idx(m.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return m.values[a] < m.values[b]; });
    for (std::size_t k = 1; k < idx.size(); ++k)
        CHECK(out.values[idx[k]] >= out.values[idx[k - 1]]);
}

TEST_CASE("histogram stretch: clip keeps at most the clipped mass at the bounds") {
    // 1000 mid-range values plus two far outliers; 0.2% clipping pins the
    // outliers to the bounds without letting them stretch the bulk.
    ScalarMap m(1002, 1);
    std::mt19937_64 gen(4);
    for (int i = 0; i < 1000; ++i)
        m.values[i] = 0.3 + 0.1 * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    m.values[1000] = 0.0;
    m.values[1001] = 1.0;
    const ScalarMap out = histogram_stretch(m, 0.002, 0.1, 0.9);
    CHECK(out.values[1000] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(out.values[1001] == doctest::Approx(0.9).epsilon(1e-12));
    // the bulk is strictly inside the bounds except the quantile-pinned tails
    int at_lo = 0, at_hi = 0;
    for (double v : out.values) {
        at_lo += (v == 0.1);
        at_hi += (v == 0.9);
    }
    CHECK(at_lo <= 3);
    CHECK(at_hi <= 3);
}

TEST_CASE("sorted_quantile interpolates linearly") {
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    CHECK(sorted_quantile(s, 0.0) == doctest::Approx(1.0));
    CHECK(sorted_quantile(s, 1.0) == doctest::Approx(4.0));
    CHECK(sorted_quantile(s, 0.5) == doctest::Approx(2.5));
    const std::vector<double> one{7.0};
    CHECK(sorted_quantile(one, 0.3) == doctest::Approx(7.0));
}

TEST_CASE("grayscale conversion") {
    const ImageBuf white(3, 2, 1.0, 1.0, 1.0);
    const ScalarMap g1 = to_grayscale(white);
    for (double v : g1.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    const ImageBuf red(3, 2, 1.0, 0.0, 0.0);
    const ScalarMap g2 = to_grayscale(red);
    for (double v : g2.values) CHECK(v == doctest::Approx(0.299).epsilon(1e-12));

    // convexity: output between per-pixel channel extremes
    const ImageBuf img = testutil::rand_image(15, 11, 23);
    const ScalarMap g3 = to_grayscale(img);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        CHECK(g3.values[i] >= std::min({img.r[i], img.g[i], img.b[i]}) - 1e-12);
        CHECK(g3.values[i] <= std::max({img.r[i], img.g[i], img.b[i]}) + 1e-12);
    }

    // a gray image maps to its own plane
    ImageBuf gray(5, 4);
    const ScalarMap noise = testutil::rand_map(5, 4, 31);
    gray.r = noise.values;
    gray.g = noise.values;
    gray.b = noise.values;
    CHECK(testutil::max_abs_diff(to_grayscale(gray), noise) < 1e-12);
}

TEST_CASE("resize: identity and constants") {
    const ImageBuf img = testutil::rand_image(12, 9, 41);
    CHECK(testutil::bitwise_equal(resize_bilinear(img, 12, 9), img));

    const ImageBuf c(5, 4, 0.3, 0.6, 0.9);
    const ImageBuf up = resize_bilinear(c, 17, 13);
    CHECK(up.width == 17);
    CHECK(up.height == 13);
    for (double v : up.r) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
    for (double v : up.b) CHECK(v == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("resize: 2-to-4 pixel-center hand oracle") {
    ImageBuf img(2, 1);
    img.r = {0.0, 1.0};
    img.g = {0.0, 1.0};
    img.b = {0.0, 1.0};
    const ImageBuf out = resize_bilinear(img, 4, 1);
    const std::vector<double> expect{0.0, 0.25, 0.75, 1.0};
    for (int i = 0; i < 4; ++i)
        CHECK(out.r[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("resize: rejects empty targets") {
    const ImageBuf img(4, 4, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(resize_bilinear(img, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(resize_bilinear(img, 4, -1), std::invalid_argument);
}
