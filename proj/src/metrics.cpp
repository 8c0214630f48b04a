#include "uwimg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "uwimg/transmission.hpp"  // saturation_map, shared with the ARSM chain

namespace uwimg {

namespace {

void check_same_size(const ImageBuf& a, const ImageBuf& b, const char* who) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument(std::string(who) + ": image dimensions differ");
}

void check_nonempty(const ImageBuf& img, const char* who) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument(std::string(who) + ": empty image");
}

}  // namespace

double rmse(const ImageBuf& a, const ImageBuf& b) {
    check_nonempty(a, "rmse");
    check_same_size(a, b, "rmse");
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& pa = a.plane(c);
        const auto& pb = b.plane(c);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            const double d = 255.0 * (pa[i] - pb[i]);
            sum += d * d;
        }
    }
    return std::sqrt(sum / (3.0 * static_cast<double>(a.pixel_count())));
}

double ssim(const ImageBuf& a, const ImageBuf& b) {
    check_nonempty(a, "ssim");
    check_same_size(a, b, "ssim");
    constexpr int kWin = 11, kRad = kWin / 2;
    constexpr double kSigma = 1.5, kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
    if (a.width < kWin || a.height < kWin)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");

    // normalized 2-D Gaussian window
    double w[kWin][kWin];
    double wsum = 0.0;
    for (int y = 0; y < kWin; ++y)
        for (int x = 0; x < kWin; ++x) {
            const double dy = y - kRad, dx = x - kRad;
            w[y][x] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
            wsum += w[y][x];
        }
    for (int y = 0; y < kWin; ++y)
        for (int x = 0; x < kWin; ++x) w[y][x] /= wsum;

    const ScalarMap ga = to_grayscale(a);
    const ScalarMap gb = to_grayscale(b);

    double total = 0.0;
    std::size_t count = 0;
    for (int cy = kRad; cy < a.height - kRad; ++cy)
        for (int cx = kRad; cx < a.width - kRad; ++cx) {
            double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
            for (int dy = -kRad; dy <= kRad; ++dy)
                for (int dx = -kRad; dx <= kRad; ++dx) {
                    const double wv = w[dy + kRad][dx + kRad];
                    const double va = ga.at(cx + dx, cy + dy);
                    const double vb = gb.at(cx + dx, cy + dy);
                    mx += wv * va;
                    my += wv * vb;
                    xx += wv * va * va;
                    yy += wv * vb * vb;
                    xy += wv * va * vb;
                }
            const double vx = xx - mx * mx;
            const double vy = yy - my * my;
            const double cov = xy - mx * my;
            total += ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) /
                     ((mx * mx + my * my + kC1) * (vx + vy + kC2));
            ++count;
        }
    return total / static_cast<double>(count);
}

double entropy(const ImageBuf& img) {
    check_nonempty(img, "entropy");
    const ScalarMap gray = to_grayscale(img);
    std::size_t hist[256] = {};
    for (const double v : gray.values) ++hist[quantize8(v)];
    const double n = static_cast<double>(gray.size());
    double h = 0.0;
    for (const std::size_t c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

namespace {

struct Lab {
    double l, a, b;
};

double srgb_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double kCube = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
    return t > kCube ? std::cbrt(t) : t / (3.0 * (6.0 / 29.0) * (6.0 / 29.0)) + 4.0 / 29.0;
}

Lab rgb_to_lab(double r, double g, double b) {
    const double lr = srgb_linear(r), lg = srgb_linear(g), lb = srgb_linear(b);
    const double x = 0.4124564 * lr + 0.3575761 * lg + 0.1804375 * lb;
    const double y = 0.2126729 * lr + 0.7151522 * lg + 0.0721750 * lb;
    const double z = 0.0193339 * lr + 0.1191920 * lg + 0.9503041 * lb;
    const double fx = lab_f(x / 0.95047), fy = lab_f(y), fz = lab_f(z / 1.08883);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

// Largest chroma the sRGB gamut can produce, taken over the cube corners
// (the blue primary wins). Computed from the converter itself so the
// normalizer can never drift from the conversion constants.
double max_corner_chroma() {
    double best = 0.0;
    for (int r = 0; r <= 1; ++r)
        for (int g = 0; g <= 1; ++g)
            for (int b = 0; b <= 1; ++b) {
                const Lab lab = rgb_to_lab(r, g, b);
                best = std::max(best, std::hypot(lab.a, lab.b));
            }
    return best;
}

}  // namespace

double uciqe(const ImageBuf& img) {
    check_nonempty(img, "uciqe");
    static const double kChromaMax = max_corner_chroma();

    const std::size_t n = img.pixel_count();
    std::vector<double> lum(n);
    double c_sum = 0.0, c_sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Lab lab = rgb_to_lab(img.r[i], img.g[i], img.b[i]);
        const double chroma = std::hypot(lab.a, lab.b);
        c_sum += chroma;
        c_sum2 += chroma * chroma;
        lum[i] = lab.l;
    }
    const double dn = static_cast<double>(n);
    const double c_mean = c_sum / dn;
    const double sigma_c = std::sqrt(std::max(c_sum2 / dn - c_mean * c_mean, 0.0));

    std::sort(lum.begin(), lum.end());
    const double con_l = (sorted_quantile(lum, 0.99) - sorted_quantile(lum, 0.01)) / 100.0;

    const ScalarMap sat = saturation_map(img);
    double s_sum = 0.0;
    for (const double v : sat.values) s_sum += v;
    const double mu_s = s_sum / dn;

    return 0.4680 * (sigma_c / kChromaMax) + 0.2745 * con_l + 0.2576 * mu_s;
}

QualityReport quality_no_reference(const ImageBuf& img) {
    QualityReport q;
    q.entropy = entropy(img);
    q.uciqe = uciqe(img);
    return q;
}

QualityReport quality_full(const ImageBuf& img, const ImageBuf& reference) {
    QualityReport q = quality_no_reference(img);
    q.rmse = rmse(img, reference);
    q.ssim = ssim(img, reference);
    return q;
}

}  // namespace uwimg
