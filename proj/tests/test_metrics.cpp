#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "support/testutil.hpp"
#include "uwimg/metrics.hpp"

using namespace uwimg;

namespace {

ImageBuf shuffled_pixels(const ImageBuf& img, std::uint64_t seed) {
    std::vector<std::size_t> order(img.pixel_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 gen(seed);
    std::shuffle(order.begin(), order.end(), gen);
    ImageBuf out(img.width, img.height);
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.r[i] = img.r[order[i]];
        out.g[i] = img.g[order[i]];
        out.b[i] = img.b[order[i]];
    }
    return out;
}

}  // namespace

TEST_CASE("rmse: identity, full-scale, and a hand-computed mix") {
    const ImageBuf img = testutil::rand_image(13, 9, 1);
    CHECK(rmse(img, img) == 0.0);

    const ImageBuf black(8, 8, 0.0, 0.0, 0.0);
    const ImageBuf white(8, 8, 1.0, 1.0, 1.0);
    CHECK(rmse(black, white) == doctest::Approx(255.0).epsilon(1e-12));

    // Half the samples differ by 0.5, half agree: sqrt(0.5^2 / 2) * 255.
    ImageBuf mix(2, 1);
    mix.r = {0.5, 0.0};
    mix.g = {0.5, 0.0};
    mix.b = {0.5, 0.0};
    const ImageBuf zero(2, 1);
    CHECK(rmse(mix, zero) == doctest::Approx(90.15611460128482).epsilon(1e-12));
}

TEST_CASE("rmse: symmetry and triangle inequality") {
    const ImageBuf a = testutil::rand_image(10, 7, 2);
    const ImageBuf b = testutil::rand_image(10, 7, 3);
    const ImageBuf c = testutil::rand_image(10, 7, 4);
    CHECK(rmse(a, b) == rmse(b, a));
    CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-12);
}

TEST_CASE("rmse: rejects mismatched or empty images") {
    const ImageBuf a(4, 4, 0.5, 0.5, 0.5);
    const ImageBuf b(4, 5, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(rmse(a, b), std::invalid_argument);
    CHECK_THROWS_AS(rmse(ImageBuf{}, ImageBuf{}), std::invalid_argument);
}

TEST_CASE("ssim: self-comparison is unity") {
    const ImageBuf img = testutil::rand_image(16, 13, 5);
    CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim: constant pair matches the closed form") {
    // Flat images have zero variance, so only the luminance term differs:
    // (2*0.25*0.75 + 1e-4) / (0.25^2 + 0.75^2 + 1e-4).
    const ImageBuf a(12, 12, 0.25, 0.25, 0.25);
    const ImageBuf b(12, 12, 0.75, 0.75, 0.75);
    CHECK(ssim(a, b) == doctest::Approx(0.6000639897616381).epsilon(1e-9));
}

TEST_CASE("ssim: symmetric, and inversion scores below mild dimming") {
    const ImageBuf x = testutil::rand_image(20, 15, 6);
    ImageBuf inv(20, 15), dim(20, 15);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < x.pixel_count(); ++i) {
            inv.plane(c)[i] = 1.0 - x.plane(c)[i];
            dim.plane(c)[i] = 0.9 * x.plane(c)[i];
        }
    CHECK(std::abs(ssim(x, inv) - ssim(inv, x)) < 1e-12);
    CHECK(ssim(x, inv) < ssim(x, dim));
}

TEST_CASE("ssim: rejects images below the window size") {
    const ImageBuf small(10, 64, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(ssim(small, small), std::invalid_argument);
    const ImageBuf a(12, 12), b(12, 13);
    CHECK_THROWS_AS(ssim(a, b), std::invalid_argument);
}

TEST_CASE("entropy: flat image carries no information") {
    CHECK(entropy(ImageBuf(9, 5, 0.37, 0.37, 0.37)) == 0.0);
}

TEST_CASE("entropy: equiprobable gray levels") {
    // All 256 levels once -> 8 bits; two levels -> 1 bit.
    ImageBuf ramp(16, 16);
    for (std::size_t i = 0; i < ramp.pixel_count(); ++i) {
        const double v = static_cast<double>(i) / 255.0;
        ramp.r[i] = ramp.g[i] = ramp.b[i] = v;
    }
    CHECK(entropy(ramp) == doctest::Approx(8.0).epsilon(1e-9));

    ImageBuf duo(2, 1);
    duo.r = {0.0, 1.0};
    duo.g = {0.0, 1.0};
    duo.b = {0.0, 1.0};
    CHECK(entropy(duo) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entropy: luma-equal colors collapse to one bin") {
    // Both colors share the Rec.601 luma 0.25, so the grayscale histogram
    // has a single occupied bin.
    ImageBuf img(6, 4);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        if (i % 2 == 0) {
            img.r[i] = img.g[i] = img.b[i] = 0.25;
        } else {
            img.r[i] = 0.25 + 0.587 * 0.3;
            img.g[i] = 0.25 - 0.299 * 0.3;
            img.b[i] = 0.25;
        }
    }
    CHECK(entropy(img) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("entropy: invariant under pixel permutation") {
    const ImageBuf img = testutil::rand_image(17, 11, 7);
    CHECK(entropy(img) == entropy(shuffled_pixels(img, 99)));
}

TEST_CASE("uciqe: achromatic flat images score zero") {
    for (const double v : {0.2, 0.5, 0.85})
        CHECK(uciqe(ImageBuf(8, 8, v, v, v)) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("uciqe: black/white split isolates contrast and saturation terms") {
    // Both halves are achromatic (zero chroma spread); luminance spans the
    // full 0..100 range, and the saturation convention assigns 1 to black and
    // 0 to white: 0.2745 * 1 + 0.2576 * 0.5.
    ImageBuf img(16, 16);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double v = i < img.pixel_count() / 2 ? 0.0 : 1.0;
        img.r[i] = img.g[i] = img.b[i] = v;
    }
    CHECK(uciqe(img) == doctest::Approx(0.2745 + 0.2576 * 0.5).epsilon(1e-4));
}

TEST_CASE("uciqe: saturated color raises the score above a gray base") {
    ImageBuf img(12, 12, 0.5, 0.5, 0.5);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * 12 + x;
            img.r[i] = 1.0;
            img.g[i] = 0.0;
            img.b[i] = 0.0;
        }
    CHECK(uciqe(img) > 0.05);
}

TEST_CASE("uciqe: permutation invariant and deterministic") {
    const ImageBuf img = testutil::rand_image(14, 10, 8);
    const double a = uciqe(img);
    CHECK(a == uciqe(img));
    CHECK(uciqe(shuffled_pixels(img, 17)) == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("quality report wrappers match the individual metrics") {
    const ImageBuf img = testutil::rand_image(18, 14, 9);
    const ImageBuf ref = testutil::rand_image(18, 14, 10);
    const QualityReport nr = quality_no_reference(img);
    CHECK(nr.entropy == entropy(img));
    CHECK(nr.uciqe == uciqe(img));
    CHECK(nr.rmse == 0.0);
    const QualityReport full = quality_full(img, ref);
    CHECK(full.entropy == entropy(img));
    CHECK(full.rmse == rmse(img, ref));
    CHECK(full.ssim == ssim(img, ref));
}
