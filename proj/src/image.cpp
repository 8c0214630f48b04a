#include "uwimg/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace uwimg {

ScalarMap::ScalarMap(int w, int h, double fill) : width(w), height(h) {
    if (w < 0 || h < 0) throw std::invalid_argument("ScalarMap: negative dimensions");
    values.assign(static_cast<std::size_t>(w) * h, fill);
}

ImageBuf::ImageBuf(int w, int h, double fill_r, double fill_g, double fill_b)
    : width(w), height(h) {
    if (w < 0 || h < 0) throw std::invalid_argument("ImageBuf: negative dimensions");
    const auto n = static_cast<std::size_t>(w) * h;
    r.assign(n, fill_r);
    g.assign(n, fill_g);
    b.assign(n, fill_b);
}

std::vector<double>& ImageBuf::plane(int c) {
    switch (c) {
        case 0: return r;
        case 1: return g;
        case 2: return b;
    }
    throw std::out_of_range("ImageBuf::plane: channel index must be 0, 1 or 2");
}

const std::vector<double>& ImageBuf::plane(int c) const {
    switch (c) {
        case 0: return r;
        case 1: return g;
        case 2: return b;
    }
    throw std::out_of_range("ImageBuf::plane: channel index must be 0, 1 or 2");
}

unsigned char quantize8(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::floor(c * 255.0 + 0.5));
}

ImageBuf gray_image(const ScalarMap& map) {
    ImageBuf img(map.width, map.height);
    img.r = map.values;
    img.g = map.values;
    img.b = map.values;
    return img;
}

double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("sorted_quantile: empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (frac == 0.0 || i + 1 >= sorted.size()) return sorted[i];
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

namespace {

// Stats from a 256-bin histogram of grid-aligned values; the trimmed sums are
// exact integers, so the result matches the sort-based path for any tie order.
ChannelStats stats_from_hist(const std::int64_t hist[256], std::int64_t n, std::int64_t cut) {
    const std::int64_t lo = cut, hi = n - cut;  // kept positions [lo, hi)
    const std::int64_t m = hi - lo;

    std::int64_t sum = 0, sum2 = 0;
    const std::int64_t med_lo_pos = lo + (m - 1) / 2, med_hi_pos = lo + m / 2;
    double med_lo = 0.0, med_hi = 0.0;

    std::int64_t cum = 0;
    for (int v = 0; v < 256; ++v) {
        const std::int64_t cnt = hist[v];
        if (cnt == 0) continue;
        const std::int64_t begin = std::max(cum, lo);
        const std::int64_t end = std::min(cum + cnt, hi);
        if (end > begin) {
            const std::int64_t k = end - begin;
            sum += k * v;
            sum2 += k * static_cast<std::int64_t>(v) * v;
        }
        if (med_lo_pos >= cum && med_lo_pos < cum + cnt) med_lo = v;
        if (med_hi_pos >= cum && med_hi_pos < cum + cnt) med_hi = v;
        cum += cnt;
    }

    ChannelStats s;
    const double dm = static_cast<double>(m);
    s.avg = static_cast<double>(sum) / dm;
    const double var = static_cast<double>(sum2) / dm - s.avg * s.avg;
    s.std = std::sqrt(std::max(var, 0.0));
    s.med = 0.5 * (med_lo + med_hi);
    return s;
}

}  // namespace

ChannelStats trimmed_channel_stats(std::span<const double> plane, double trim) {
    if (plane.empty()) throw std::invalid_argument("trimmed_channel_stats: empty plane");
    if (!(trim >= 0.0 && trim < 0.5))
        throw std::invalid_argument("trimmed_channel_stats: trim must be in [0, 0.5)");

    const auto n = static_cast<std::int64_t>(plane.size());
    const auto cut = static_cast<std::int64_t>(trim * static_cast<double>(n));

    // Fast path: 8-bit-decoded data lands exactly on the k/255 grid, where a
    // counting pass replaces the sort.
    std::int64_t hist[256] = {};
    bool on_grid = true;
    for (const double v : plane) {
        const double scaled = v * 255.0;
        const double k = std::floor(scaled + 0.5);
        if (k < 0.0 || k > 255.0 || std::abs(scaled - k) > 1e-9) {
            on_grid = false;
            break;
        }
        ++hist[static_cast<int>(k)];
    }
    if (on_grid) return stats_from_hist(hist, n, cut);

    std::vector<double> sorted(plane.begin(), plane.end());
    std::sort(sorted.begin(), sorted.end());

    const std::int64_t lo = cut, hi = n - cut, m = hi - lo;
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) {
        const double v = sorted[static_cast<std::size_t>(i)] * 255.0;
        sum += v;
        sum2 += v * v;
    }

    ChannelStats s;
    const double dm = static_cast<double>(m);
    s.avg = sum / dm;
    s.std = std::sqrt(std::max(sum2 / dm - s.avg * s.avg, 0.0));
    const double med_lo = sorted[static_cast<std::size_t>(lo + (m - 1) / 2)] * 255.0;
    const double med_hi = sorted[static_cast<std::size_t>(lo + m / 2)] * 255.0;
    s.med = 0.5 * (med_lo + med_hi);
    return s;
}

ScalarMap histogram_stretch(const ScalarMap& map, double clip, double out_lo, double out_hi) {
    if (map.values.empty()) throw std::invalid_argument("histogram_stretch: empty map");
    if (!(clip >= 0.0 && clip < 0.5))
        throw std::invalid_argument("histogram_stretch: clip must be in [0, 0.5)");
    if (!(out_lo < out_hi))
        throw std::invalid_argument("histogram_stretch: output range is empty");

    std::vector<double> sorted = map.values;
    std::sort(sorted.begin(), sorted.end());
    const double v_lo = sorted_quantile(sorted, clip);
    const double v_hi = sorted_quantile(sorted, 1.0 - clip);

    ScalarMap out(map.width, map.height);
    if (v_hi - v_lo < 1e-12) {
        std::fill(out.values.begin(), out.values.end(), 0.5 * (out_lo + out_hi));
        return out;
    }
    const double scale = (out_hi - out_lo) / (v_hi - v_lo);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        const double t = std::clamp((map.values[i] - v_lo) * scale + out_lo, out_lo, out_hi);
        out.values[i] = t;
    }
    return out;
}

ScalarMap to_grayscale(const ImageBuf& img) {
    ScalarMap out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        out.values[i] = 0.299 * img.r[i] + 0.587 * img.g[i] + 0.114 * img.b[i];
    return out;
}

namespace {

// Source coordinate for an output pixel under pixel-center alignment.
inline double src_coord(int dst, int dst_size, int src_size) {
    return (static_cast<double>(dst) + 0.5) * static_cast<double>(src_size) /
               static_cast<double>(dst_size) -
           0.5;
}

std::vector<double> resize_plane(const std::vector<double>& src, int w, int h,
                                 int out_w, int out_h) {
    std::vector<double> dst(static_cast<std::size_t>(out_w) * out_h);
    for (int y = 0; y < out_h; ++y) {
        double sy = std::clamp(src_coord(y, out_h, h), 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_w; ++x) {
            double sx = std::clamp(src_coord(x, out_w, w), 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - x0;
            const auto idx = [w](int yy, int xx) {
                return static_cast<std::size_t>(yy) * w + xx;
            };
            const double top = src[idx(y0, x0)] * (1.0 - fx) + src[idx(y0, x1)] * fx;
            const double bot = src[idx(y1, x0)] * (1.0 - fx) + src[idx(y1, x1)] * fx;
            dst[static_cast<std::size_t>(y) * out_w + x] = top * (1.0 - fy) + bot * fy;
        }
    }
    return dst;
}

}  // namespace

ImageBuf resize_bilinear(const ImageBuf& img, int out_w, int out_h) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("resize_bilinear: empty source image");
    if (out_w <= 0 || out_h <= 0)
        throw std::invalid_argument("resize_bilinear: output dimensions must be positive");
    ImageBuf out(out_w, out_h);
    out.r = resize_plane(img.r, img.width, img.height, out_w, out_h);
    out.g = resize_plane(img.g, img.width, img.height, out_w, out_h);
    out.b = resize_plane(img.b, img.width, img.height, out_w, out_h);
    return out;
}

ScalarMap resize_bilinear(const ScalarMap& map, int out_w, int out_h) {
    if (map.width <= 0 || map.height <= 0)
        throw std::invalid_argument("resize_bilinear: empty source map");
    if (out_w <= 0 || out_h <= 0)
        throw std::invalid_argument("resize_bilinear: output dimensions must be positive");
    ScalarMap out(out_w, out_h);
    out.values = resize_plane(map.values, map.width, map.height, out_w, out_h);
    return out;
}

}  // namespace uwimg
