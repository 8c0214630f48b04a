#pragma once

#include <optional>

#include "uwimg/backlight.hpp"
#include "uwimg/image.hpp"
#include "uwimg/transmission.hpp"

namespace uwimg {

struct EnhanceParams {
    double t_floor = 0.2;   // transmission clamp inside the inversion
    double t_ceil = 0.9;
    double lambda_v = 0.25;  // color-correction regularizer
    bool color_correction = true;
};

struct StageTimings {
    double bl_s = 0.0;
    double tm_s = 0.0;
    double restore_s = 0.0;
    double color_s = 0.0;
    double total_s = 0.0;
};

struct PipelineParams {
    BlMethod bl_method = BlMethod::statistical;
    TmMethod tm_method = TmMethod::nudcp;
    TmParams tm{};
    AttenuationProfile profile{};
    EnhanceParams enhance{};
    // Overrides for synthetic round trips: skip the corresponding estimator.
    std::optional<BackgroundLight> fixed_bl;
    std::optional<double> fixed_t;  // constant transmission, all channels
};

struct PipelineResult {
    ImageBuf restored;   // after inversion, before color correction
    ImageBuf enhanced;   // final output (== restored when correction is off)
    BackgroundLight bl;
    TransmissionSet tms;
    ScalarMap depth;     // relative scene depth in [0,1]
    StageTimings timings;
    bool color_corrected = false;
};

// Invert the formation model per channel: J = (I - B) / clamp(t, floor, ceil) + B,
// clamped to [0,1]. Throws if dimensions disagree.
ImageBuf restore_ifm(const ImageBuf& img, const BackgroundLight& bl,
                     const TransmissionSet& tms, const EnhanceParams& p = {});

// Gray-world style channel balance: each channel is divided by
// mu_max * (mu_c / mu_ref) + lambda_v, where mu_ref is the L2 norm of the
// channel means and mu_max the largest mean; output clamped to [0,1].
// An all-black image is returned unchanged (applied = false).
ImageBuf color_correct(const ImageBuf& img, const EnhanceParams& p = {},
                       bool* applied = nullptr);

// Full chain: background light -> transmissions -> inversion -> color balance,
// with per-stage wall timings. Failures carry the stage name.
PipelineResult enhance_pipeline(const ImageBuf& img, const PipelineParams& p = {});

}  // namespace uwimg
