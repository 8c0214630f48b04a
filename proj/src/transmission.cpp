#include "uwimg/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwimg {

namespace {

void check_image(const ImageBuf& img, const char* who) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument(std::string(who) + ": empty image");
}

void check_bl_positive(const BackgroundLight& bl, const char* who) {
    if (!(bl.b_r > 0.0 && bl.b_g > 0.0 && bl.b_b > 0.0))
        throw std::invalid_argument(std::string(who) + ": background light must be positive");
}

void check_same_size(const ScalarMap& a, const ScalarMap& b, const char* who) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument(std::string(who) + ": map dimensions differ");
}

void check_profile(const AttenuationProfile& prof, const char* who) {
    for (int c = 0; c < 3; ++c) {
        const double v = prof.channel(c);
        if (!(v > 0.0 && v < 1.0))
            throw std::invalid_argument(std::string(who) +
                                        ": attenuation ratios must lie in (0, 1)");
    }
}

}  // namespace

const char* to_string(TmMethod m) {
    switch (m) {
        case TmMethod::nudcp: return "nudcp";
        case TmMethod::dcp: return "dcp";
        case TmMethod::udcp: return "udcp";
        case TmMethod::mip: return "mip";
    }
    return "?";
}

bool parse_tm_method(const std::string& s, TmMethod& out) {
    for (TmMethod m : {TmMethod::nudcp, TmMethod::dcp, TmMethod::udcp, TmMethod::mip}) {
        if (s == to_string(m)) {
            out = m;
            return true;
        }
    }
    return false;
}

ScalarMap nudcp_red_coarse(const ImageBuf& img, const BackgroundLight& bl, const TmParams& p) {
    check_image(img, "nudcp_red_coarse");
    check_bl_positive(bl, "nudcp_red_coarse");
    const double b_max = std::max({bl.b_r, bl.b_g, bl.b_b});
    const double denom = 1.0 - p.dark_prior / b_max;
    if (!(denom > 0.0))
        throw std::invalid_argument(
            "nudcp_red_coarse: brightest background channel must exceed the dark prior");

    // Pointwise channel-min of the normalized planes, then the windowed min.
    // min commutes with the window, so this matches the per-channel formulation
    // bit for bit while touching each pixel once.
    ScalarMap ratio_min(img.width, img.height);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        ratio_min.values[i] =
            std::min({img.r[i] / bl.b_r, img.g[i] / bl.b_g, img.b[i] / bl.b_b});

    const ScalarMap dark = window_extremum(ratio_min, p.patch, ExtremumMode::min);

    ScalarMap out(img.width, img.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = std::clamp((1.0 - dark.values[i]) / denom, 0.0, 1.0);
    return out;
}

ScalarMap nudcp_red_tm(const ImageBuf& img, const BackgroundLight& bl, const TmParams& p) {
    const ScalarMap coarse = nudcp_red_coarse(img, bl, p);
    return histogram_stretch(coarse, p.stretch_clip, p.stretch_lo, p.stretch_hi);
}

ScalarMap ulap_depth_raw(const ImageBuf& img, const TmParams& p) {
    check_image(img, "ulap_depth_raw");
    ScalarMap out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double d =
            p.ulap_mu0 + p.ulap_mu1 * std::max(img.g[i], img.b[i]) + p.ulap_mu2 * img.r[i];
        out.values[i] = std::clamp(d, 0.0, 1.0);
    }
    return out;
}

ScalarMap ulap_depth(const ImageBuf& img, const TmParams& p) {
    const ScalarMap raw = ulap_depth_raw(img, p);
    ScalarMap refined = guided_filter(to_grayscale(img), raw, p.guided);
    for (double& v : refined.values) v = std::clamp(v, 0.0, 1.0);
    return refined;
}

double base_depth(const ImageBuf& img, const BackgroundLight& bl) {
    check_image(img, "base_depth");
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double b = bl.channel(c);
        const double denom = std::max(1.0 - b, b);
        if (!(denom > 0.0)) throw std::invalid_argument("base_depth: degenerate background light");
        double gap = 0.0;
        for (const double v : img.plane(c)) gap = std::max(gap, std::abs(b - v));
        worst = std::max(worst, gap / denom);
    }
    return 1.0 - worst;
}

ScalarMap tm_from_depth(const ScalarMap& depth, double d0, double nrer, const TmParams& p) {
    if (depth.width <= 0 || depth.height <= 0)
        throw std::invalid_argument("tm_from_depth: empty depth map");
    if (!(nrer > 0.0 && nrer < 1.0))
        throw std::invalid_argument("tm_from_depth: attenuation ratio must lie in (0, 1)");
    ScalarMap out(depth.width, depth.height);
    for (std::size_t i = 0; i < depth.size(); ++i)
        out.values[i] = std::pow(nrer, p.d_inf * (depth.values[i] + d0));
    return out;
}

ScalarMap compensate_tm(const ScalarMap& t_dark, const ScalarMap& t_depth) {
    check_same_size(t_dark, t_depth, "compensate_tm");
    ScalarMap out(t_dark.width, t_dark.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = std::min(t_dark.values[i], t_depth.values[i]);
    return out;
}

ScalarMap saturation_map(const ImageBuf& img) {
    check_image(img, "saturation_map");
    ScalarMap out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double hi = std::max({img.r[i], img.g[i], img.b[i]});
        const double lo = std::min({img.r[i], img.g[i], img.b[i]});
        out.values[i] = hi > 0.0 ? (hi - lo) / hi : 1.0;
    }
    return out;
}

ScalarMap arsm(const ImageBuf& img, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("arsm: lambda must be in [0, 1]");
    ScalarMap sat = saturation_map(img);
    for (double& v : sat.values) v = lambda * (1.0 - v);
    return sat;
}

ScalarMap fuse_tm(const ScalarMap& t_compensated, const ScalarMap& reverse_sat) {
    check_same_size(t_compensated, reverse_sat, "fuse_tm");
    ScalarMap out(t_compensated.width, t_compensated.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = std::max(t_compensated.values[i], reverse_sat.values[i]);
    return out;
}

TransmissionSet derive_gb_tms(const ScalarMap& t_r, const AttenuationProfile& prof) {
    if (t_r.width <= 0 || t_r.height <= 0)
        throw std::invalid_argument("derive_gb_tms: empty red transmission");
    check_profile(prof, "derive_gb_tms");

    TransmissionSet out;
    out.t_r = t_r;
    out.t_g = ScalarMap(t_r.width, t_r.height);
    out.t_b = ScalarMap(t_r.width, t_r.height);
    const double log_r = std::log(prof.nrer_r);
    for (std::size_t i = 0; i < t_r.size(); ++i) {
        const double tr = std::min(t_r.values[i], 1.0);
        if (!(tr > 0.0))
            throw std::invalid_argument("derive_gb_tms: red transmission must be positive");
        const double d = std::log(tr) / log_r;  // relative optical depth, >= 0
        out.t_g.values[i] = std::pow(prof.nrer_g, d);
        out.t_b.values[i] = std::pow(prof.nrer_b, d);
    }
    return out;
}

ScalarMap baseline_tm(const ImageBuf& img, const BackgroundLight& bl, TmMethod method,
                      const TmParams& p) {
    check_image(img, "baseline_tm");
    if (method == TmMethod::nudcp)
        throw std::invalid_argument("baseline_tm: nudcp is the primary method, not a baseline");

    ScalarMap t(img.width, img.height);
    if (method == TmMethod::dcp || method == TmMethod::udcp) {
        check_bl_positive(bl, "baseline_tm");
        ScalarMap ratio_min(img.width, img.height);
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            const double gb = std::min(img.g[i] / bl.b_g, img.b[i] / bl.b_b);
            ratio_min.values[i] =
                method == TmMethod::udcp ? gb : std::min(img.r[i] / bl.b_r, gb);
        }
        const ScalarMap dark = window_extremum(ratio_min, p.patch, ExtremumMode::min);
        for (std::size_t i = 0; i < t.size(); ++i) t.values[i] = 1.0 - dark.values[i];
    } else {  // mip
        ScalarMap red_max = window_extremum(
            [&] {
                ScalarMap m(img.width, img.height);
                m.values = img.r;
                return m;
            }(),
            p.patch, ExtremumMode::max);
        ScalarMap gb_max(img.width, img.height);
        for (std::size_t i = 0; i < img.pixel_count(); ++i)
            gb_max.values[i] = std::max(img.g[i], img.b[i]);
        gb_max = window_extremum(gb_max, p.patch, ExtremumMode::max);

        double d_max = -1e300;
        for (std::size_t i = 0; i < t.size(); ++i) {
            t.values[i] = red_max.values[i] - gb_max.values[i];
            d_max = std::max(d_max, t.values[i]);
        }
        for (double& v : t.values) v = v + 1.0 - d_max;
    }

    for (double& v : t.values) v = std::clamp(v, p.t_floor_baseline, 1.0);
    return t;
}

TransmissionSet build_transmission(const ImageBuf& img, const BackgroundLight& bl,
                                   const TmParams& p, const AttenuationProfile& prof,
                                   ScalarMap* depth_out) {
    check_image(img, "build_transmission");
    check_profile(prof, "build_transmission");

    const ScalarMap t_dark = nudcp_red_tm(img, bl, p);
    const ScalarMap depth = ulap_depth(img, p);
    const double d0 = base_depth(img, bl);
    const ScalarMap t_depth = tm_from_depth(depth, d0, prof.nrer_r, p);

    const ScalarMap t_cps = compensate_tm(t_dark, t_depth);
    const ScalarMap reverse_sat = arsm(img, p.lambda_arsm);
    const ScalarMap t_fused = fuse_tm(t_cps, reverse_sat);

    // Positivity floor: a transmission of exactly zero is unphysical and would
    // break the attenuation-exponent derivation below.
    ScalarMap t_r = guided_filter(to_grayscale(img), t_fused, p.guided);
    for (double& v : t_r.values) v = std::clamp(v, p.t_min, 1.0);

    if (depth_out) *depth_out = depth;
    return derive_gb_tms(t_r, prof);
}

}  // namespace uwimg
