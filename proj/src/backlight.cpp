#include "uwimg/backlight.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace uwimg {

namespace {

void check_image(const ImageBuf& img, const char* who) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument(std::string(who) + ": empty image");
}

// Red-to-green/blue separation score: the larger of |r-g| and |r-b|.
double mip_score(const ImageBuf& img, std::size_t i) {
    return std::max(std::abs(img.r[i] - img.g[i]), std::abs(img.r[i] - img.b[i]));
}

}  // namespace

const char* to_string(BlMethod m) {
    switch (m) {
        case BlMethod::statistical: return "statistical";
        case BlMethod::dcp: return "dcp";
        case BlMethod::udcp: return "udcp";
        case BlMethod::mip: return "mip";
        case BlMethod::quadtree: return "quadtree";
        case BlMethod::blurriness: return "blurriness";
    }
    return "?";
}

bool parse_bl_method(const std::string& s, BlMethod& out) {
    for (BlMethod m : {BlMethod::statistical, BlMethod::dcp, BlMethod::udcp, BlMethod::mip,
                       BlMethod::quadtree, BlMethod::blurriness}) {
        if (s == to_string(m)) {
            out = m;
            return true;
        }
    }
    return false;
}

double bl_model_gb(double avg, double std) { return 1.13 * avg + 1.11 * std - 25.6; }

double bl_model_red(double med) {
    return 140.0 / (1.0 + 14.4 * std::exp(-0.034 * med));
}

BackgroundLight estimate_bl_statistical(const ImageBuf& img) {
    check_image(img, "estimate_bl_statistical");
    const ChannelStats sr = trimmed_channel_stats(img.r);
    const ChannelStats sg = trimmed_channel_stats(img.g);
    const ChannelStats sb = trimmed_channel_stats(img.b);

    const auto finish = [](double v255) { return std::clamp(v255, 5.0, 250.0) / 255.0; };
    BackgroundLight bl;
    bl.b_r = finish(bl_model_red(sr.med));
    bl.b_g = finish(bl_model_gb(sg.avg, sg.std));
    bl.b_b = finish(bl_model_gb(sb.avg, sb.std));
    return bl;
}

BackgroundLight estimate_bl_dcp(const ImageBuf& img, WindowSpec w, bool gb_only) {
    check_image(img, "estimate_bl_dcp");
    if (w.radius < 0) throw std::invalid_argument("estimate_bl_dcp: negative radius");

    const int width = img.width, height = img.height;
    std::vector<double> chan_min(img.pixel_count());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double gb = std::min(img.g[i], img.b[i]);
        chan_min[i] = gb_only ? gb : std::min(img.r[i], gb);
    }

    // Plain patch scan, as in the reference implementations this estimator
    // reproduces. The pipeline's own filters use the O(N) sliding version.
    double best = -1.0;
    std::size_t best_idx = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double dark = 1.0;
            const int y0 = std::max(y - w.radius, 0), y1 = std::min(y + w.radius, height - 1);
            const int x0 = std::max(x - w.radius, 0), x1 = std::min(x + w.radius, width - 1);
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx)
                    dark = std::min(dark, chan_min[static_cast<std::size_t>(yy) * width + xx]);
            if (dark > best) {
                best = dark;
                best_idx = static_cast<std::size_t>(y) * width + x;
            }
        }

    return {img.r[best_idx], img.g[best_idx], img.b[best_idx]};
}

BackgroundLight estimate_bl_mip(const ImageBuf& img) {
    check_image(img, "estimate_bl_mip");
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double d = mip_score(img, i);
        if (d > best) {
            best = d;
            best_idx = i;
        }
    }
    return {img.r[best_idx], img.g[best_idx], img.b[best_idx]};
}

namespace {

struct Region {
    int x = 0, y = 0, w = 0, h = 0;
};

struct RegionStats {
    double mean = 0.0, var = 0.0;
};

RegionStats region_stats(const ScalarMap& map, const Region& r) {
    double sum = 0.0, sum2 = 0.0;
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) {
            const double v = map.at(x, y);
            sum += v;
            sum2 += v * v;
        }
    const double n = static_cast<double>(r.w) * r.h;
    const double mean = sum / n;
    return {mean, std::max(sum2 / n - mean * mean, 0.0)};
}

// Quad-tree descent: repeatedly split into four equal quadrants and follow the
// one with the highest score, stopping once the region is at or below
// min_area_frac of the whole image (ties break toward the top-left quadrant).
template <typename Score>
Region descend_quadtree(int width, int height, double min_area_frac, Score&& score) {
    const double min_area = min_area_frac * static_cast<double>(width) * height;
    Region cur{0, 0, width, height};
    while (static_cast<double>(cur.w) * cur.h > min_area && cur.w >= 2 && cur.h >= 2) {
        const int w0 = cur.w / 2, h0 = cur.h / 2;
        const Region quads[4] = {
            {cur.x, cur.y, w0, h0},
            {cur.x + w0, cur.y, cur.w - w0, h0},
            {cur.x, cur.y + h0, w0, cur.h - h0},
            {cur.x + w0, cur.y + h0, cur.w - w0, cur.h - h0},
        };
        Region best_q{};
        double best_score = -1e300;
        for (const Region& q : quads) {
            if (q.w <= 0 || q.h <= 0) continue;
            const double s = score(q);
            if (s > best_score) {
                best_score = s;
                best_q = q;
            }
        }
        cur = best_q;
    }
    return cur;
}

BackgroundLight region_mean_color(const ImageBuf& img, const Region& r) {
    double sr = 0.0, sg = 0.0, sb = 0.0;
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            sr += img.r[i];
            sg += img.g[i];
            sb += img.b[i];
        }
    const double n = static_cast<double>(r.w) * r.h;
    return {sr / n, sg / n, sb / n};
}

}  // namespace

BackgroundLight estimate_bl_quadtree(const ImageBuf& img, double min_area_frac) {
    check_image(img, "estimate_bl_quadtree");
    if (!(min_area_frac > 0.0 && min_area_frac <= 1.0))
        throw std::invalid_argument("estimate_bl_quadtree: min_area_frac must be in (0, 1]");

    const ScalarMap gray = to_grayscale(img);
    const Region cur =
        descend_quadtree(img.width, img.height, min_area_frac, [&](const Region& q) {
            const RegionStats s = region_stats(gray, q);
            return s.mean - std::sqrt(s.var);
        });

    // Red-to-green/blue separation pick inside the selected flat region.
    double best = -1.0;
    std::size_t best_idx = 0;
    for (int y = cur.y; y < cur.y + cur.h; ++y)
        for (int x = cur.x; x < cur.x + cur.w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            const double d = mip_score(img, i);
            if (d > best) {
                best = d;
                best_idx = i;
            }
        }
    return {img.r[best_idx], img.g[best_idx], img.b[best_idx]};
}

ScalarMap blurriness_map(const ImageBuf& img) {
    check_image(img, "blurriness_map");
    const ScalarMap gray = to_grayscale(img);

    ScalarMap p(img.width, img.height, 0.0);
    for (const int k : {9, 17, 33, 65}) {
        const ScalarMap blurred = gaussian_blur(gray, k, static_cast<double>(k) / 6.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            p.values[i] += std::abs(gray.values[i] - blurred.values[i]);
    }
    for (double& v : p.values) v *= 0.25;

    ScalarMap rough = window_extremum(p, WindowSpec{2}, ExtremumMode::max);
    ScalarMap filled = fill_holes(rough);
    ScalarMap refined = guided_filter(gray, filled, GuidedParams{});
    for (double& v : refined.values) v = std::clamp(v, 0.0, 1.0);
    return refined;
}

BackgroundLight estimate_bl_blurriness(const ImageBuf& img, double alpha) {
    check_image(img, "estimate_bl_blurriness");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("estimate_bl_blurriness: alpha must be in [0, 1]");

    const ScalarMap blur = blurriness_map(img);
    const ScalarMap gray = to_grayscale(img);

    // Candidate 1: mean color of the top 0.1% most-blurry pixels.
    std::vector<double> sorted = blur.values;
    std::sort(sorted.begin(), sorted.end());
    const double cutoff = sorted_quantile(sorted, 0.999);
    double sr = 0.0, sg = 0.0, sb = 0.0, n = 0.0;
    for (std::size_t i = 0; i < blur.size(); ++i) {
        if (blur.values[i] < cutoff) continue;
        sr += img.r[i];
        sg += img.g[i];
        sb += img.b[i];
        n += 1.0;
    }
    if (n == 0.0) {  // cutoff above every value can only happen on pathological data
        sr = img.r[0];
        sg = img.g[0];
        sb = img.b[0];
        n = 1.0;
    }
    const BackgroundLight cand_blurry{sr / n, sg / n, sb / n};

    // Candidates 2 and 3: mean colors of the lowest-variance and the
    // highest-mean-blurriness quad-tree leaves.
    const Region flat = descend_quadtree(
        img.width, img.height, 0.01,
        [&](const Region& q) { return -region_stats(gray, q).var; });
    const Region blurry_leaf = descend_quadtree(
        img.width, img.height, 0.01,
        [&](const Region& q) { return region_stats(blur, q).mean; });
    const BackgroundLight cand_flat = region_mean_color(img, flat);
    const BackgroundLight cand_leaf = region_mean_color(img, blurry_leaf);

    // Weighted blend of the component-wise extremes over the three candidates.
    BackgroundLight bl;
    for (int c = 0; c < 3; ++c) {
        const double v0 = cand_blurry.channel(c), v1 = cand_flat.channel(c),
                     v2 = cand_leaf.channel(c);
        const double hi = std::max({v0, v1, v2});
        const double lo = std::min({v0, v1, v2});
        (c == 0 ? bl.b_r : c == 1 ? bl.b_g : bl.b_b) = alpha * hi + (1.0 - alpha) * lo;
    }
    return bl;
}

TimedBl estimate_bl(const ImageBuf& img, BlMethod method) {
    const auto start = std::chrono::steady_clock::now();
    BackgroundLight bl;
    switch (method) {
        case BlMethod::statistical: bl = estimate_bl_statistical(img); break;
        case BlMethod::dcp: bl = estimate_bl_dcp(img, WindowSpec{4}, false); break;
        case BlMethod::udcp: bl = estimate_bl_dcp(img, WindowSpec{4}, true); break;
        case BlMethod::mip: bl = estimate_bl_mip(img); break;
        case BlMethod::quadtree: bl = estimate_bl_quadtree(img); break;
        case BlMethod::blurriness: bl = estimate_bl_blurriness(img); break;
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    return {bl, dt.count()};
}

}  // namespace uwimg
