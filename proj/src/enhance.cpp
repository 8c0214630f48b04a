#include "uwimg/enhance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uwimg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

[[noreturn]] void stage_fail(const char* stage, const std::exception& e) {
    throw std::runtime_error(std::string(stage) + " stage: " + e.what());
}

// Relative depth implied by a red transmission map: invert t = nrer^(d_inf * d).
ScalarMap depth_from_tm(const ScalarMap& t_r, const AttenuationProfile& prof, double d_inf) {
    ScalarMap depth(t_r.width, t_r.height);
    const double denom = d_inf * std::log(prof.nrer_r);
    for (std::size_t i = 0; i < t_r.size(); ++i) {
        const double t = std::clamp(t_r.values[i], 1e-12, 1.0);
        depth.values[i] = std::clamp(std::log(t) / denom, 0.0, 1.0);
    }
    return depth;
}

}  // namespace

ImageBuf restore_ifm(const ImageBuf& img, const BackgroundLight& bl,
                     const TransmissionSet& tms, const EnhanceParams& p) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("restore_ifm: empty image");
    if (!(p.t_floor > 0.0 && p.t_floor <= p.t_ceil && p.t_ceil <= 1.0))
        throw std::invalid_argument("restore_ifm: need 0 < t_floor <= t_ceil <= 1");
    for (int c = 0; c < 3; ++c) {
        const ScalarMap& t = tms.channel(c);
        if (t.width != img.width || t.height != img.height)
            throw std::invalid_argument("restore_ifm: transmission dimensions differ from image");
    }

    ImageBuf out(img.width, img.height);
    for (int c = 0; c < 3; ++c) {
        const auto& in_plane = img.plane(c);
        auto& out_plane = out.plane(c);
        const auto& t = tms.channel(c).values;
        const double b = bl.channel(c);
        for (std::size_t i = 0; i < in_plane.size(); ++i) {
            const double tc = std::clamp(t[i], p.t_floor, p.t_ceil);
            out_plane[i] = std::clamp((in_plane[i] - b) / tc + b, 0.0, 1.0);
        }
    }
    return out;
}

ImageBuf color_correct(const ImageBuf& img, const EnhanceParams& p, bool* applied) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("color_correct: empty image");
    if (!(p.lambda_v > 0.0))
        throw std::invalid_argument("color_correct: lambda_v must be positive");

    const double n = static_cast<double>(img.pixel_count());
    double mu[3];
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (const double v : img.plane(c)) sum += v;
        mu[c] = sum / n;
    }
    const double mu_ref = std::sqrt(mu[0] * mu[0] + mu[1] * mu[1] + mu[2] * mu[2]);
    if (mu_ref <= 0.0) {
        // nothing to balance on an all-black image
        if (applied) *applied = false;
        return img;
    }
    const double mu_max = std::max({mu[0], mu[1], mu[2]});

    ImageBuf out(img.width, img.height);
    for (int c = 0; c < 3; ++c) {
        const double denom = mu_max * (mu[c] / mu_ref) + p.lambda_v;
        const auto& in_plane = img.plane(c);
        auto& out_plane = out.plane(c);
        for (std::size_t i = 0; i < in_plane.size(); ++i)
            out_plane[i] = std::clamp(in_plane[i] / denom, 0.0, 1.0);
    }
    if (applied) *applied = true;
    return out;
}

PipelineResult enhance_pipeline(const ImageBuf& img, const PipelineParams& p) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("enhance_pipeline: empty image");

    PipelineResult res;
    const auto t_total = Clock::now();

    // background light
    try {
        if (p.fixed_bl) {
            res.bl = *p.fixed_bl;
            res.timings.bl_s = 0.0;
        } else {
            const TimedBl timed = estimate_bl(img, p.bl_method);
            res.bl = timed.bl;
            res.timings.bl_s = timed.seconds;
        }
    } catch (const std::exception& e) {
        stage_fail("background-light", e);
    }

    // transmission
    try {
        const auto t0 = Clock::now();
        if (p.fixed_t) {
            const double t = *p.fixed_t;
            if (!(t > 0.0 && t <= 1.0))
                throw std::invalid_argument("fixed transmission must lie in (0, 1]");
            res.tms.t_r = ScalarMap(img.width, img.height, t);
            res.tms.t_g = ScalarMap(img.width, img.height, t);
            res.tms.t_b = ScalarMap(img.width, img.height, t);
            res.depth = depth_from_tm(res.tms.t_r, p.profile, p.tm.d_inf);
        } else if (p.tm_method == TmMethod::nudcp) {
            res.tms = build_transmission(img, res.bl, p.tm, p.profile, &res.depth);
        } else {
            ScalarMap t = baseline_tm(img, res.bl, p.tm_method, p.tm);
            res.depth = depth_from_tm(t, p.profile, p.tm.d_inf);
            res.tms.t_g = t;
            res.tms.t_b = t;
            res.tms.t_r = std::move(t);
        }
        res.timings.tm_s = seconds_since(t0);
    } catch (const std::exception& e) {
        stage_fail("transmission", e);
    }

    // restoration
    try {
        const auto t0 = Clock::now();
        res.restored = restore_ifm(img, res.bl, res.tms, p.enhance);
        res.timings.restore_s = seconds_since(t0);
    } catch (const std::exception& e) {
        stage_fail("restoration", e);
    }

    // color balance
    try {
        const auto t0 = Clock::now();
        if (p.enhance.color_correction) {
            res.enhanced = color_correct(res.restored, p.enhance, &res.color_corrected);
        } else {
            res.enhanced = res.restored;
            res.color_corrected = false;
        }
        res.timings.color_s = seconds_since(t0);
    } catch (const std::exception& e) {
        stage_fail("color-balance", e);
    }

    res.timings.total_s = seconds_since(t_total);
    return res;
}

}  // namespace uwimg
