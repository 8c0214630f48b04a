#include "uwimg/filters.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <stdexcept>
#include <vector>

namespace uwimg {

namespace {

void check_nonempty(const ScalarMap& map, const char* who) {
    if (map.width <= 0 || map.height <= 0)
        throw std::invalid_argument(std::string(who) + ": empty map");
}

// Sliding min/max along one line with the window truncated at the ends.
// Monotonic deque, O(n) amortized.
void slide_extremum(const double* src, double* dst, int n, int stride, int r, bool take_min) {
    std::deque<int> dq;
    int added = -1;
    for (int x = 0; x < n; ++x) {
        const int hi = std::min(x + r, n - 1);
        while (added < hi) {
            ++added;
            const double v = src[static_cast<std::ptrdiff_t>(added) * stride];
            while (!dq.empty()) {
                const double back = src[static_cast<std::ptrdiff_t>(dq.back()) * stride];
                if (take_min ? back >= v : back <= v)
                    dq.pop_back();
                else
                    break;
            }
            dq.push_back(added);
        }
        while (dq.front() < x - r) dq.pop_front();
        dst[static_cast<std::ptrdiff_t>(x) * stride] = src[static_cast<std::ptrdiff_t>(dq.front()) * stride];
    }
}

// Per-line windowed sums via prefix sums (numerically stable, O(n)).
void slide_sum(const double* src, double* dst, int n, int stride, int r,
               std::vector<double>& prefix) {
    prefix.resize(static_cast<std::size_t>(n) + 1);
    prefix[0] = 0.0;
    for (int i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] =
            prefix[static_cast<std::size_t>(i)] + src[static_cast<std::ptrdiff_t>(i) * stride];
    for (int x = 0; x < n; ++x) {
        const int lo = std::max(x - r, 0);
        const int hi = std::min(x + r, n - 1);
        dst[static_cast<std::ptrdiff_t>(x) * stride] =
            prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)];
    }
}

}  // namespace

ScalarMap window_extremum(const ScalarMap& map, WindowSpec w, ExtremumMode mode) {
    check_nonempty(map, "window_extremum");
    if (w.radius < 0) throw std::invalid_argument("window_extremum: negative radius");
    const bool take_min = mode == ExtremumMode::min;

    ScalarMap tmp(map.width, map.height);
    for (int y = 0; y < map.height; ++y)
        slide_extremum(map.values.data() + static_cast<std::size_t>(y) * map.width,
                       tmp.values.data() + static_cast<std::size_t>(y) * map.width,
                       map.width, 1, w.radius, take_min);

    ScalarMap out(map.width, map.height);
    for (int x = 0; x < map.width; ++x)
        slide_extremum(tmp.values.data() + x, out.values.data() + x, map.height,
                       map.width, w.radius, take_min);
    return out;
}

ScalarMap box_mean(const ScalarMap& map, int radius) {
    check_nonempty(map, "box_mean");
    if (radius < 0) throw std::invalid_argument("box_mean: negative radius");

    ScalarMap tmp(map.width, map.height);
    std::vector<double> prefix;
    for (int y = 0; y < map.height; ++y)
        slide_sum(map.values.data() + static_cast<std::size_t>(y) * map.width,
                  tmp.values.data() + static_cast<std::size_t>(y) * map.width,
                  map.width, 1, radius, prefix);

    ScalarMap out(map.width, map.height);
    for (int x = 0; x < map.width; ++x)
        slide_sum(tmp.values.data() + x, out.values.data() + x, map.height, map.width,
                  radius, prefix);

    for (int y = 0; y < map.height; ++y) {
        const int cy = std::min(y + radius, map.height - 1) - std::max(y - radius, 0) + 1;
        for (int x = 0; x < map.width; ++x) {
            const int cx = std::min(x + radius, map.width - 1) - std::max(x - radius, 0) + 1;
            out.at(x, y) /= static_cast<double>(cx) * cy;
        }
    }
    return out;
}

ScalarMap gaussian_blur(const ScalarMap& map, int kernel_size, double sigma) {
    check_nonempty(map, "gaussian_blur");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw std::invalid_argument("gaussian_blur: kernel size must be odd and positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be positive");

    const int r = kernel_size / 2;
    std::vector<double> k(static_cast<std::size_t>(kernel_size));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;

    const auto convolve_line = [&](const double* src, double* dst, int n, int stride) {
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int xi = std::clamp(x + i, 0, n - 1);
                acc += k[static_cast<std::size_t>(i + r)] *
                       src[static_cast<std::ptrdiff_t>(xi) * stride];
            }
            dst[static_cast<std::ptrdiff_t>(x) * stride] = acc;
        }
    };

    ScalarMap tmp(map.width, map.height);
    for (int y = 0; y < map.height; ++y)
        convolve_line(map.values.data() + static_cast<std::size_t>(y) * map.width,
                      tmp.values.data() + static_cast<std::size_t>(y) * map.width,
                      map.width, 1);
    ScalarMap out(map.width, map.height);
    for (int x = 0; x < map.width; ++x)
        convolve_line(tmp.values.data() + x, out.values.data() + x, map.height, map.width);
    return out;
}

ScalarMap guided_filter(const ScalarMap& guide, const ScalarMap& input, GuidedParams p) {
    check_nonempty(guide, "guided_filter");
    if (guide.width != input.width || guide.height != input.height)
        throw std::invalid_argument("guided_filter: guide and input dimensions differ");
    if (p.radius < 0) throw std::invalid_argument("guided_filter: negative radius");
    if (!(p.epsilon > 0.0)) throw std::invalid_argument("guided_filter: epsilon must be positive");

    const std::size_t n = guide.size();
    ScalarMap ii(guide.width, guide.height), ip(guide.width, guide.height);
    for (std::size_t i = 0; i < n; ++i) {
        ii.values[i] = guide.values[i] * guide.values[i];
        ip.values[i] = guide.values[i] * input.values[i];
    }

    const ScalarMap mean_i = box_mean(guide, p.radius);
    const ScalarMap mean_p = box_mean(input, p.radius);
    const ScalarMap corr_ii = box_mean(ii, p.radius);
    const ScalarMap corr_ip = box_mean(ip, p.radius);

    ScalarMap a(guide.width, guide.height), b(guide.width, guide.height);
    for (std::size_t i = 0; i < n; ++i) {
        const double var = corr_ii.values[i] - mean_i.values[i] * mean_i.values[i];
        const double cov = corr_ip.values[i] - mean_i.values[i] * mean_p.values[i];
        a.values[i] = cov / (var + p.epsilon);
        b.values[i] = mean_p.values[i] - a.values[i] * mean_i.values[i];
    }

    const ScalarMap mean_a = box_mean(a, p.radius);
    const ScalarMap mean_b = box_mean(b, p.radius);

    ScalarMap out(guide.width, guide.height);
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = mean_a.values[i] * guide.values[i] + mean_b.values[i];
    return out;
}

namespace {

// Morphological reconstruction by dilation (Vincent's hybrid raster + FIFO
// algorithm, 4-connectivity). marker must be <= mask everywhere.
ScalarMap reconstruct_dilate(ScalarMap marker, const ScalarMap& mask) {
    const int w = marker.width, h = marker.height;
    auto& m = marker.values;
    const auto& f = mask.values;
    const auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

    // forward raster pass: propagate from the top and left
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = m[idx(x, y)];
            if (y > 0) v = std::max(v, m[idx(x, y - 1)]);
            if (x > 0) v = std::max(v, m[idx(x - 1, y)]);
            m[idx(x, y)] = std::min(v, f[idx(x, y)]);
        }

    // backward raster pass, queueing pixels that still need to propagate
    std::queue<std::pair<int, int>> fifo;
    for (int y = h - 1; y >= 0; --y)
        for (int x = w - 1; x >= 0; --x) {
            double v = m[idx(x, y)];
            if (y + 1 < h) v = std::max(v, m[idx(x, y + 1)]);
            if (x + 1 < w) v = std::max(v, m[idx(x + 1, y)]);
            m[idx(x, y)] = std::min(v, f[idx(x, y)]);

            const double cur = m[idx(x, y)];
            const auto needs_push = [&](int nx, int ny) {
                return m[idx(nx, ny)] < cur && m[idx(nx, ny)] < f[idx(nx, ny)];
            };
            if ((y + 1 < h && needs_push(x, y + 1)) || (x + 1 < w && needs_push(x + 1, y)))
                fifo.emplace(x, y);
        }

    while (!fifo.empty()) {
        const auto [x, y] = fifo.front();
        fifo.pop();
        const double cur = m[idx(x, y)];
        const auto relax = [&](int nx, int ny) {
            const std::size_t q = idx(nx, ny);
            if (m[q] < cur && m[q] != f[q]) {
                m[q] = std::min(cur, f[q]);
                fifo.emplace(nx, ny);
            }
        };
        if (x > 0) relax(x - 1, y);
        if (x + 1 < w) relax(x + 1, y);
        if (y > 0) relax(x, y - 1);
        if (y + 1 < h) relax(x, y + 1);
    }
    return marker;
}

}  // namespace

ScalarMap fill_holes(const ScalarMap& map) {
    check_nonempty(map, "fill_holes");
    const int w = map.width, h = map.height;
    const double top = *std::max_element(map.values.begin(), map.values.end());

    // Complement, reconstruct from the border, complement back: interior
    // minima not connected to the border are raised to their pour level.
    ScalarMap mask(w, h);
    for (std::size_t i = 0; i < map.size(); ++i) mask.values[i] = top - map.values[i];

    ScalarMap marker(w, h, 0.0);
    for (int x = 0; x < w; ++x) {
        marker.at(x, 0) = mask.at(x, 0);
        marker.at(x, h - 1) = mask.at(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        marker.at(0, y) = mask.at(0, y);
        marker.at(w - 1, y) = mask.at(w - 1, y);
    }

    ScalarMap recon = reconstruct_dilate(std::move(marker), mask);
    ScalarMap out(w, h);
    for (std::size_t i = 0; i < map.size(); ++i) out.values[i] = top - recon.values[i];
    return out;
}

}  // namespace uwimg
