#pragma once

#include "uwimg/image.hpp"

namespace uwimg {

// Square window of side 2*radius+1 centered on the pixel.
struct WindowSpec {
    int radius = 4;
};

enum class ExtremumMode { min, max };

// Sliding windowed min/max with replicated edges (equivalently: the window
// truncated at the borders). Monotonic-deque implementation, O(N) in pixels.
ScalarMap window_extremum(const ScalarMap& map, WindowSpec w, ExtremumMode mode);

// Sliding mean over the same truncated square window (each output is the mean
// of the in-bounds samples). Separable sliding sums, O(N).
ScalarMap box_mean(const ScalarMap& map, int radius);

// Separable Gaussian blur; kernel_size must be odd and >= 1. Edges replicate.
ScalarMap gaussian_blur(const ScalarMap& map, int kernel_size, double sigma);

struct GuidedParams {
    int radius = 16;
    double epsilon = 1e-3;
};

// Edge-preserving guided filter (He et al. box-mean formulation):
//   a = cov(I,p) / (var(I) + eps),  b = mean(p) - a * mean(I),
//   q = mean(a) * I + mean(b).
// guide and input must share dimensions.
ScalarMap guided_filter(const ScalarMap& guide, const ScalarMap& input,
                        GuidedParams p = {});

// Fill interior minima ("holes") by morphological reconstruction of the
// inverted map from its border (4-connectivity, Vincent's hybrid algorithm).
ScalarMap fill_holes(const ScalarMap& map);

}  // namespace uwimg
