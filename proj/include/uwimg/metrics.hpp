#pragma once

#include "uwimg/image.hpp"

namespace uwimg {

struct QualityReport {
    double rmse = 0.0;
    double ssim = 0.0;
    double entropy = 0.0;
    double uciqe = 0.0;
};

// Root-mean-square error over all channels, reported on the 0-255 scale.
double rmse(const ImageBuf& a, const ImageBuf& b);

// Mean SSIM on grayscale, 11x11 Gaussian window (sigma 1.5), C1=1e-4, C2=9e-4
// on the [0,1] scale, averaged over fully valid window positions only.
double ssim(const ImageBuf& a, const ImageBuf& b);

// Shannon entropy (bits) of the 256-bin histogram of the quantized grayscale.
double entropy(const ImageBuf& img);

// Underwater color image quality: weighted sum of chroma std-dev, luminance
// contrast (1st-99th percentile spread), and mean saturation in CIELab/CIELch
// (D65), each normalized to [0,1].
double uciqe(const ImageBuf& img);

// All no-reference metrics at once; rmse/ssim require the reference.
QualityReport quality_no_reference(const ImageBuf& img);
QualityReport quality_full(const ImageBuf& img, const ImageBuf& reference);

}  // namespace uwimg
