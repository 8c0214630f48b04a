#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uwimg/enhance.hpp"
#include "uwimg/metrics.hpp"

namespace uwimg {

// One row of a ground-truth background-light table (0-255 per channel).
struct AnnotationRecord {
    std::string image_id;
    int b_r = 0;
    int b_g = 0;
    int b_b = 0;
};

// Parse a CSV with header `image_id,b_r,b_g,b_b`. Throws on a missing header,
// malformed rows (row number reported), out-of-range values, or duplicate ids.
std::vector<AnnotationRecord> load_annotations(const std::string& path);
void write_annotations(std::span<const AnnotationRecord> rows, const std::string& path);

// An estimate counts as accurate when its rounded 8-bit value is within tol_r
// of the truth on red and within tol_gb on both green and blue.
bool bl_accuracy(const BackgroundLight& est, const AnnotationRecord& truth,
                 int tol_r = 30, int tol_gb = 40);

// Forward formation model: hazy = clear * t + B * (1 - t) per channel, clamped
// to [0,1]. Transmissions must lie in (0,1].
ImageBuf synth_haze(const ImageBuf& clear, const BackgroundLight& bl,
                    const TransmissionSet& tms);
ImageBuf synth_haze(const ImageBuf& clear, const BackgroundLight& bl, double t);

// Deterministic full-range noise image with 8-bit-quantized values.
ImageBuf random_image(int w, int h, std::uint64_t seed);

// Seeded synthetic underwater corpus: smooth mid-toned textures submerged in a
// random veiling light at low constant transmission (haze-dominated frames).
struct SynthOptions {
    int count = 20;
    int width = 160;
    int height = 120;
    std::uint64_t seed = 7;
    double t_min = 0.10, t_max = 0.20;
    double br_min = 50.0 / 255, br_max = 140.0 / 255;  // red veiling light
    double bg_min = 40.0 / 255, bg_max = 220.0 / 255;  // green
    double bb_min = 40.0 / 255, bb_max = 220.0 / 255;  // blue
    bool quantize = true;  // snap hazy output to the 8-bit grid
};

struct SynthImage {
    std::string image_id;
    ImageBuf clear;
    ImageBuf hazy;
    BackgroundLight bl;
    double t = 0.0;
};

std::vector<SynthImage> synth_corpus(const SynthOptions& opts = {});

// Background-light timing comparison on seeded noise images. Strictly serial.
struct BenchRow {
    int width = 0;
    int height = 0;
    BlMethod method{};
    double median_s = 0.0;
    double best_s = 0.0;
    BackgroundLight bl;
};

std::vector<BenchRow> bench_bl(std::span<const std::pair<int, int>> sizes,
                               std::span<const BlMethod> methods, int reps = 5,
                               std::uint64_t seed = 42);

// Corpus evaluation: run the pipeline over every readable image in a directory,
// score the output against the input (reference metrics), collect no-reference
// metrics and stage timings, and, when an annotation table is supplied,
// background-light accuracy.
struct EvaluateOptions {
    PipelineParams pipeline{};
    std::string annotations_path;  // empty: no accuracy section
    bool full_reference = true;    // rmse/ssim of output vs input
    int jobs = 0;                  // 0: hardware concurrency
};

struct ImageEvaluation {
    std::string image_id;
    double rmse = 0.0;        // output vs input
    double ssim = 0.0;        // output vs input (NaN when the image is too small)
    double entropy = 0.0;     // of the output
    double uciqe = 0.0;       // of the output
    double entropy_in = 0.0;  // of the input, for improvement bookkeeping
    double uciqe_in = 0.0;
    std::array<int, 3> bl_8bit{};
    std::optional<bool> accurate;
    StageTimings timings;
};

struct AccuracySummary {
    int n_annotated = 0;
    int n_accurate = 0;
    double accuracy = 0.0;
    double mae_r = 0.0, mae_g = 0.0, mae_b = 0.0;
};

struct CorpusAggregate {
    int n_images = 0;
    double rmse = 0.0, ssim = 0.0, entropy = 0.0, uciqe = 0.0;  // means over rows
    double entropy_in = 0.0, uciqe_in = 0.0;
    double mean_total_s = 0.0;
};

struct CorpusReport {
    std::string corpus_dir;
    std::string bl_method;
    std::string tm_method;
    std::vector<ImageEvaluation> per_image;  // sorted by image_id
    CorpusAggregate aggregate;
    std::optional<AccuracySummary> accuracy;
    std::vector<std::string> skipped;
};

CorpusReport evaluate_corpus(const std::string& dir, const EvaluateOptions& opts = {},
                             std::ostream* log = nullptr);

std::string report_to_json(const CorpusReport& report);
void write_report(const CorpusReport& report, const std::string& path);

}  // namespace uwimg
