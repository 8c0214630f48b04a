#pragma once

#include <string>

#include "uwimg/backlight.hpp"
#include "uwimg/filters.hpp"
#include "uwimg/image.hpp"

namespace uwimg {

// Per-channel transmission maps, each in [0,1].
struct TransmissionSet {
    ScalarMap t_r, t_g, t_b;

    const ScalarMap& channel(int c) const { return c == 0 ? t_r : (c == 1 ? t_g : t_b); }
};

// Normalized residual energy ratio per channel (per meter of water).
struct AttenuationProfile {
    double nrer_r = 0.83;
    double nrer_g = 0.95;
    double nrer_b = 0.97;

    double channel(int c) const { return c == 0 ? nrer_r : (c == 1 ? nrer_g : nrer_b); }
};

struct TmParams {
    WindowSpec patch{4};       // window for dark-channel style minima
    double dark_prior = 0.1;   // residual haze kept by the dark-channel model
    double lambda_arsm = 0.7;  // saturation-map weight
    double d_inf = 10.0;       // depth scale (meters at relative depth 1)
    double stretch_clip = 0.002;
    double stretch_lo = 0.1;
    double stretch_hi = 0.9;
    double ulap_mu0 = 0.53214829;   // linear depth model intercept
    double ulap_mu1 = 0.51309827;   // weight of max(g,b)
    double ulap_mu2 = -0.91066194;  // weight of r
    GuidedParams guided{};
    double t_floor_baseline = 0.05;  // lower clamp for the baseline maps
    double t_min = 1e-6;             // positivity floor for refined maps
};

enum class TmMethod { nudcp, dcp, udcp, mip };

const char* to_string(TmMethod m);
bool parse_tm_method(const std::string& s, TmMethod& out);

// Red-channel transmission from the normalized dark channel:
//   t = (1 - min_c windowed-min(I_c / B_c)) / (1 - dark_prior / max_c B_c),
// clamped to [0,1]. Requires every B channel > 0.
ScalarMap nudcp_red_coarse(const ImageBuf& img, const BackgroundLight& bl,
                           const TmParams& p = {});

// Coarse map followed by the percentile-clipped stretch to [stretch_lo, stretch_hi].
ScalarMap nudcp_red_tm(const ImageBuf& img, const BackgroundLight& bl,
                       const TmParams& p = {});

// Linear attenuation-prior relative depth: mu0 + mu1*max(g,b) + mu2*r,
// clamped to [0,1].
ScalarMap ulap_depth_raw(const ImageBuf& img, const TmParams& p = {});

// Raw depth refined by the guided filter (guide = grayscale image), re-clamped.
ScalarMap ulap_depth(const ImageBuf& img, const TmParams& p = {});

// Closest-point depth offset: 1 - max over pixels and channels of
// |B_c - I_c| / max(1 - B_c, B_c).
double base_depth(const ImageBuf& img, const BackgroundLight& bl);

// t = nrer^(d_inf * (depth + d0)) per pixel.
ScalarMap tm_from_depth(const ScalarMap& depth, double d0, double nrer,
                        const TmParams& p = {});

// Pointwise min of the dark-channel and depth-based red maps.
ScalarMap compensate_tm(const ScalarMap& t_dark, const ScalarMap& t_depth);

// HSV-style saturation: (max - min) / max per pixel, 1 where max = 0.
ScalarMap saturation_map(const ImageBuf& img);

// Adaptive reverse saturation map: lambda * (1 - saturation).
ScalarMap arsm(const ImageBuf& img, double lambda = 0.7);

// Pointwise max of the compensated map and the reverse-saturation map.
ScalarMap fuse_tm(const ScalarMap& t_compensated, const ScalarMap& reverse_sat);

// G and B transmissions from the red one via the attenuation identity
// t_c = nrer_c ^ (log t_r / log nrer_r); the red map is passed through.
TransmissionSet derive_gb_tms(const ScalarMap& t_r, const AttenuationProfile& prof = {});

// Single-map baselines (dcp / udcp / mip), floored at p.t_floor_baseline.
// TmMethod::nudcp is not a baseline and is rejected.
ScalarMap baseline_tm(const ImageBuf& img, const BackgroundLight& bl,
                      TmMethod method, const TmParams& p = {});

// Full red-channel chain (dark-channel map, depth map, compensation, saturation
// fusion, guided refinement) followed by the G/B derivation. Optionally surfaces
// the refined relative depth map.
TransmissionSet build_transmission(const ImageBuf& img, const BackgroundLight& bl,
                                   const TmParams& p = {},
                                   const AttenuationProfile& prof = {},
                                   ScalarMap* depth_out = nullptr);

}  // namespace uwimg
