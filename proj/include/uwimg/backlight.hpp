#pragma once

#include <string>

#include "uwimg/filters.hpp"
#include "uwimg/image.hpp"

namespace uwimg {

// Background (veiling) light per channel, normalized to [0,1].
struct BackgroundLight {
    double b_r = 0.0;
    double b_g = 0.0;
    double b_b = 0.0;

    double channel(int c) const { return c == 0 ? b_r : (c == 1 ? b_g : b_b); }
};

enum class BlMethod { statistical, dcp, udcp, mip, quadtree, blurriness };

const char* to_string(BlMethod m);
bool parse_bl_method(const std::string& s, BlMethod& out);

// Regression models behind the statistical estimator; inputs and outputs on
// the 0-255 scale, before the [5,250] clamp.
double bl_model_gb(double avg, double std);   // linear in trimmed mean and std
double bl_model_red(double med);              // logistic in the trimmed median

// Statistical estimator: trimmed per-channel stats (middle 80%) fed through the
// regression models, clamped to [5,250], then normalized by 255.
BackgroundLight estimate_bl_statistical(const ImageBuf& img);

// Dark-channel-prior estimator: brightest pixel of the windowed dark channel
// (min over channels of the windowed min). gb_only restricts the channel min
// to G and B (the underwater variant).
BackgroundLight estimate_bl_dcp(const ImageBuf& img, WindowSpec w = {4},
                                bool gb_only = false);

// Maximum-intensity-prior estimator: the pixel maximizing the larger of
// |r - g| and |r - b|.
BackgroundLight estimate_bl_mip(const ImageBuf& img);

// Hierarchical quadtree search: repeatedly descend into the quadrant with the
// highest mean-minus-std score while the region area exceeds
// min_area_frac * image area, then apply the MIP pick inside the final region.
BackgroundLight estimate_bl_quadtree(const ImageBuf& img, double min_area_frac = 0.01);

// Multi-scale blurriness field in [0,1] (Gaussian-difference stack, window max,
// hole filling, guided refinement).
ScalarMap blurriness_map(const ImageBuf& img);

// Blurriness-guided estimator. Three candidate colors: the mean over the 0.1%
// blurriest pixels, the mean of the flattest (lowest-variance) quadtree leaf,
// and the mean of the blurriest quadtree leaf; the estimate blends the
// channel-wise max and min of the candidates with weight alpha.
BackgroundLight estimate_bl_blurriness(const ImageBuf& img, double alpha = 0.5);

struct TimedBl {
    BackgroundLight bl;
    double seconds = 0.0;  // wall time of the estimate alone
};

// Dispatch by method, timing the call.
TimedBl estimate_bl(const ImageBuf& img, BlMethod method);

}  // namespace uwimg
