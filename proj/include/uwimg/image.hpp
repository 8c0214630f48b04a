#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace uwimg {

// Single-channel scalar field (transmission, depth, saturation, ...), row-major.
struct ScalarMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ScalarMap() = default;
    ScalarMap(int w, int h, double fill = 0.0);

    std::size_t size() const { return values.size(); }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// RGB image as three planes of intensities in [0,1], row-major.
struct ImageBuf {
    int width = 0;
    int height = 0;
    std::vector<double> r, g, b;

    ImageBuf() = default;
    ImageBuf(int w, int h, double fill_r = 0.0, double fill_g = 0.0, double fill_b = 0.0);

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::vector<double>& plane(int c);              // 0=r, 1=g, 2=b
    const std::vector<double>& plane(int c) const;
};

// Channel statistics on the 0-255 scale.
struct ChannelStats {
    double avg = 0.0;
    double med = 0.0;
    double std = 0.0;
};

// Decode PNG or binary PPM (P6), 8-bit, into [0,1] planes. Throws std::runtime_error
// on missing files or malformed/unsupported content.
ImageBuf load_image(const std::string& path);

// Encode to 8-bit PNG or PPM depending on the path extension (.png/.ppm), with
// round-half-up quantization of the clamped [0,1] intensities.
void save_image(const ImageBuf& img, const std::string& path);

// Exact round-half-up 8-bit quantization used by every save path.
unsigned char quantize8(double v);

// Grayscale copy of a scalar field (all three planes equal), for map dumps.
ImageBuf gray_image(const ScalarMap& map);

// Bilinear resampling with pixel-center alignment; replicates edges.
ImageBuf resize_bilinear(const ImageBuf& img, int out_w, int out_h);
ScalarMap resize_bilinear(const ScalarMap& map, int out_w, int out_h);

// Mean / median / population standard deviation of the values that survive
// trimming `trim` of the sorted sample off each end, reported on the 0-255
// scale. trim in [0, 0.5); trims floor(trim * n) entries per side.
ChannelStats trimmed_channel_stats(std::span<const double> plane, double trim = 0.10);

// Percentile-clipped linear stretch: values at or below the `clip` quantile map
// to out_lo, at or above the 1-clip quantile to out_hi, linear in between.
// Degenerate (constant after clipping) inputs map to the midpoint.
ScalarMap histogram_stretch(const ScalarMap& map, double clip = 0.002,
                            double out_lo = 0.1, double out_hi = 0.9);

// Rec.601 luma: 0.299 r + 0.587 g + 0.114 b.
ScalarMap to_grayscale(const ImageBuf& img);

// Linear-interpolation quantile of an ascending-sorted sample (position q*(n-1)).
double sorted_quantile(std::span<const double> sorted, double q);

}  // namespace uwimg
