#include "uwimg/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace fs = std::filesystem;

namespace uwimg {

namespace {

// Deterministic uniform draws (the distribution adapters in <random> are
// implementation-defined, so map the raw engine output ourselves).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }  // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int byte() { return static_cast<int>(gen_() % 256); }

private:
    std::mt19937_64 gen_;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_channel(const std::string& field, const char* name, int row) {
    const std::string t = trim(field);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::runtime_error("annotation row " + std::to_string(row) + ": field " +
                                 name + " is not an integer");
    if (v < 0 || v > 255)
        throw std::runtime_error("annotation row " + std::to_string(row) + ": field " +
                                 name + " out of range 0-255");
    return v;
}

}  // namespace

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open annotation file");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty annotation file");
    if (trim(line) != "image_id,b_r,b_g,b_b")
        throw std::runtime_error(path + ": missing header image_id,b_r,b_g,b_b");

    std::vector<AnnotationRecord> rows;
    std::unordered_set<std::string> seen;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 4)
            throw std::runtime_error("annotation row " + std::to_string(row) +
                                     ": expected 4 comma-separated fields");
        AnnotationRecord rec;
        rec.image_id = trim(fields[0]);
        if (rec.image_id.empty())
            throw std::runtime_error("annotation row " + std::to_string(row) +
                                     ": empty image_id");
        if (!seen.insert(rec.image_id).second)
            throw std::runtime_error("annotation row " + std::to_string(row) +
                                     ": duplicate image_id " + rec.image_id);
        rec.b_r = parse_channel(fields[1], "b_r", row);
        rec.b_g = parse_channel(fields[2], "b_g", row);
        rec.b_b = parse_channel(fields[3], "b_b", row);
        rows.push_back(std::move(rec));
    }
    return rows;
}

void write_annotations(std::span<const AnnotationRecord> rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "image_id,b_r,b_g,b_b\n";
    for (const auto& r : rows)
        out << r.image_id << "," << r.b_r << "," << r.b_g << "," << r.b_b << "\n";
    if (!out) throw std::runtime_error(path + ": write failed");
}

bool bl_accuracy(const BackgroundLight& est, const AnnotationRecord& truth, int tol_r,
                 int tol_gb) {
    const auto to8 = [](double v) { return static_cast<int>(quantize8(v)); };
    return std::abs(to8(est.b_r) - truth.b_r) <= tol_r &&
           std::abs(to8(est.b_g) - truth.b_g) <= tol_gb &&
           std::abs(to8(est.b_b) - truth.b_b) <= tol_gb;
}

ImageBuf synth_haze(const ImageBuf& clear, const BackgroundLight& bl,
                    const TransmissionSet& tms) {
    if (clear.width <= 0 || clear.height <= 0)
        throw std::invalid_argument("synth_haze: empty image");
    for (int c = 0; c < 3; ++c) {
        const ScalarMap& t = tms.channel(c);
        if (t.width != clear.width || t.height != clear.height)
            throw std::invalid_argument("synth_haze: transmission dimensions differ");
        for (const double v : t.values)
            if (!(v > 0.0 && v <= 1.0))
                throw std::invalid_argument("synth_haze: transmission must lie in (0, 1]");
    }

    ImageBuf out(clear.width, clear.height);
    for (int c = 0; c < 3; ++c) {
        const auto& j = clear.plane(c);
        auto& o = out.plane(c);
        const auto& t = tms.channel(c).values;
        const double b = bl.channel(c);
        for (std::size_t i = 0; i < j.size(); ++i)
            o[i] = std::clamp(j[i] * t[i] + (1.0 - t[i]) * b, 0.0, 1.0);
    }
    return out;
}

ImageBuf synth_haze(const ImageBuf& clear, const BackgroundLight& bl, double t) {
    TransmissionSet tms;
    tms.t_r = ScalarMap(clear.width, clear.height, t);
    tms.t_g = ScalarMap(clear.width, clear.height, t);
    tms.t_b = ScalarMap(clear.width, clear.height, t);
    return synth_haze(clear, bl, tms);
}

ImageBuf random_image(int w, int h, std::uint64_t seed) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("random_image: dimensions must be positive");
    Rng rng(seed);
    ImageBuf img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.r[i] = rng.byte() / 255.0;
        img.g[i] = rng.byte() / 255.0;
        img.b[i] = rng.byte() / 255.0;
    }
    return img;
}

std::vector<SynthImage> synth_corpus(const SynthOptions& opts) {
    if (opts.count <= 0 || opts.width <= 0 || opts.height <= 0)
        throw std::invalid_argument("synth_corpus: count and dimensions must be positive");
    if (!(opts.t_min > 0.0 && opts.t_min <= opts.t_max && opts.t_max <= 1.0))
        throw std::invalid_argument("synth_corpus: need 0 < t_min <= t_max <= 1");

    constexpr double kTau = 6.283185307179586;
    std::vector<SynthImage> out;
    out.reserve(static_cast<std::size_t>(opts.count));

    for (int n = 0; n < opts.count; ++n) {
        Rng rng(opts.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n + 1)));
        SynthImage s;
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "synth_%03d", n);
            s.image_id = buf;
        }
        s.bl.b_r = rng.uniform(opts.br_min, opts.br_max);
        s.bl.b_g = rng.uniform(opts.bg_min, opts.bg_max);
        s.bl.b_b = rng.uniform(opts.bb_min, opts.bb_max);
        s.t = rng.uniform(opts.t_min, opts.t_max);

        // smooth two-wave texture with mild per-channel weights plus grain
        const double fx1 = rng.uniform(1.0, 4.0), fy1 = rng.uniform(1.0, 4.0);
        const double fx2 = rng.uniform(2.0, 6.0), fy2 = rng.uniform(2.0, 6.0);
        const double ph1 = rng.uniform(0.0, kTau), ph2 = rng.uniform(0.0, kTau);
        double base[3], amp1[3], amp2[3];
        for (int c = 0; c < 3; ++c) {
            base[c] = rng.uniform(0.30, 0.70);
            amp1[c] = rng.uniform(-0.10, 0.10);
            amp2[c] = rng.uniform(-0.08, 0.08);
        }

        s.clear = ImageBuf(opts.width, opts.height);
        for (int y = 0; y < opts.height; ++y)
            for (int x = 0; x < opts.width; ++x) {
                const double u = static_cast<double>(x) / opts.width;
                const double v = static_cast<double>(y) / opts.height;
                const double p1 = std::sin(kTau * (fx1 * u + fy1 * v) + ph1);
                const double p2 = std::sin(kTau * (fx2 * u + fy2 * v) + ph2);
                const std::size_t i = static_cast<std::size_t>(y) * opts.width + x;
                for (int c = 0; c < 3; ++c) {
                    const double grain = rng.uniform(-0.03, 0.03);
                    s.clear.plane(c)[i] =
                        std::clamp(base[c] + amp1[c] * p1 + amp2[c] * p2 + grain, 0.02, 0.98);
                }
            }

        s.hazy = synth_haze(s.clear, s.bl, s.t);
        if (opts.quantize) {
            for (int c = 0; c < 3; ++c)
                for (double& v : s.hazy.plane(c)) v = quantize8(v) / 255.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<BenchRow> bench_bl(std::span<const std::pair<int, int>> sizes,
                               std::span<const BlMethod> methods, int reps,
                               std::uint64_t seed) {
    if (reps < 3) throw std::invalid_argument("bench_bl: need at least 3 repetitions");
    if (sizes.empty() || methods.empty())
        throw std::invalid_argument("bench_bl: sizes and methods must be non-empty");

    std::vector<BenchRow> rows;
    for (const auto& [w, h] : sizes) {
        const ImageBuf img = random_image(
            w, h, seed ^ (static_cast<std::uint64_t>(w) * 1000003ULL + static_cast<std::uint64_t>(h)));
        for (const BlMethod m : methods) {
            std::vector<double> times;
            times.reserve(static_cast<std::size_t>(reps));
            BackgroundLight bl;
            for (int i = 0; i < reps; ++i) {
                const TimedBl timed = estimate_bl(img, m);
                times.push_back(timed.seconds);
                bl = timed.bl;
            }
            std::sort(times.begin(), times.end());
            const std::size_t mid = times.size() / 2;
            const double median = times.size() % 2 == 1
                                      ? times[mid]
                                      : 0.5 * (times[mid - 1] + times[mid]);
            rows.push_back({w, h, m, median, times.front(), bl});
        }
    }
    return rows;
}

namespace {

double mean_of(const std::vector<ImageEvaluation>& rows, double ImageEvaluation::* field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        const double v = r.*field;
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

CorpusReport evaluate_corpus(const std::string& dir, const EvaluateOptions& opts,
                             std::ostream* log) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    std::unordered_map<std::string, AnnotationRecord> truth;
    if (!opts.annotations_path.empty())
        for (auto& rec : load_annotations(opts.annotations_path)) truth[rec.image_id] = rec;

    CorpusReport report;
    report.corpus_dir = dir;
    report.bl_method = to_string(opts.pipeline.bl_method);
    report.tm_method = to_string(opts.pipeline.tm_method);

    std::vector<std::optional<ImageEvaluation>> slots(files.size());
    std::vector<std::pair<std::size_t, std::string>> skipped;  // keep directory order
    std::mutex mu;

    const auto process = [&](std::size_t i) {
        const fs::path& path = files[i];
        const std::string stem = path.stem().string();
        try {
            const ImageBuf img = load_image(path.string());
            const PipelineResult res = enhance_pipeline(img, opts.pipeline);

            ImageEvaluation row;
            row.image_id = stem;
            if (opts.full_reference) {
                row.rmse = rmse(res.enhanced, img);
                row.ssim = (img.width >= 11 && img.height >= 11)
                               ? ssim(res.enhanced, img)
                               : std::numeric_limits<double>::quiet_NaN();
            } else {
                row.rmse = std::numeric_limits<double>::quiet_NaN();
                row.ssim = std::numeric_limits<double>::quiet_NaN();
            }
            row.entropy = entropy(res.enhanced);
            row.uciqe = uciqe(res.enhanced);
            row.entropy_in = entropy(img);
            row.uciqe_in = uciqe(img);
            row.bl_8bit = {quantize8(res.bl.b_r), quantize8(res.bl.b_g), quantize8(res.bl.b_b)};
            row.timings = res.timings;

            if (const auto it = truth.find(stem); it != truth.end())
                row.accurate = bl_accuracy(res.bl, it->second);

            slots[i] = std::move(row);
        } catch (const std::exception& e) {
            std::scoped_lock lock(mu);
            skipped.emplace_back(i, path.filename().string());
            if (log) *log << "skipping " << path.filename().string() << ": " << e.what() << "\n";
        }
    };

    int jobs = opts.jobs > 0 ? opts.jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    jobs = std::min<int>(jobs, static_cast<int>(files.size()) > 0 ? static_cast<int>(files.size()) : 1);

    if (jobs <= 1) {
        for (std::size_t i = 0; i < files.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1))
                    process(i);
            });
        for (auto& th : pool) th.join();
    }

    for (auto& slot : slots)
        if (slot) report.per_image.push_back(std::move(*slot));
    std::sort(skipped.begin(), skipped.end());
    for (auto& [i, name] : skipped) report.skipped.push_back(std::move(name));

    auto& agg = report.aggregate;
    agg.n_images = static_cast<int>(report.per_image.size());
    if (agg.n_images > 0) {
        agg.rmse = mean_of(report.per_image, &ImageEvaluation::rmse);
        agg.ssim = mean_of(report.per_image, &ImageEvaluation::ssim);
        agg.entropy = mean_of(report.per_image, &ImageEvaluation::entropy);
        agg.uciqe = mean_of(report.per_image, &ImageEvaluation::uciqe);
        agg.entropy_in = mean_of(report.per_image, &ImageEvaluation::entropy_in);
        agg.uciqe_in = mean_of(report.per_image, &ImageEvaluation::uciqe_in);
        double total = 0.0;
        for (const auto& r : report.per_image) total += r.timings.total_s;
        agg.mean_total_s = total / static_cast<double>(agg.n_images);
    }

    if (!opts.annotations_path.empty()) {
        AccuracySummary acc;
        for (const auto& row : report.per_image) {
            if (!row.accurate) continue;
            const auto it = truth.find(row.image_id);
            ++acc.n_annotated;
            if (*row.accurate) ++acc.n_accurate;
            acc.mae_r += std::abs(row.bl_8bit[0] - it->second.b_r);
            acc.mae_g += std::abs(row.bl_8bit[1] - it->second.b_g);
            acc.mae_b += std::abs(row.bl_8bit[2] - it->second.b_b);
        }
        if (acc.n_annotated > 0) {
            acc.accuracy = static_cast<double>(acc.n_accurate) / acc.n_annotated;
            acc.mae_r /= acc.n_annotated;
            acc.mae_g /= acc.n_annotated;
            acc.mae_b /= acc.n_annotated;
        }
        report.accuracy = acc;
    }
    return report;
}

std::string report_to_json(const CorpusReport& report) {
    using json = nlohmann::ordered_json;
    json j;
    j["meta"] = {
        {"tool", "uwimg"},
        {"corpus_dir", report.corpus_dir},
        {"bl_method", report.bl_method},
        {"tm_method", report.tm_method},
        {"ssim_note", "grayscale, 11x11 gaussian window sigma 1.5, C1=1e-4, C2=9e-4"},
    };
    j["per_image"] = json::array();
    for (const auto& row : report.per_image) {
        json r = {
            {"image_id", row.image_id},
            {"rmse", row.rmse},
            {"ssim", row.ssim},
            {"entropy", row.entropy},
            {"uciqe", row.uciqe},
            {"entropy_input", row.entropy_in},
            {"uciqe_input", row.uciqe_in},
            {"bl", {row.bl_8bit[0], row.bl_8bit[1], row.bl_8bit[2]}},
            {"timings",
             {{"bl_s", row.timings.bl_s},
              {"tm_s", row.timings.tm_s},
              {"restore_s", row.timings.restore_s},
              {"color_s", row.timings.color_s},
              {"total_s", row.timings.total_s}}},
        };
        if (row.accurate) r["accurate"] = *row.accurate;
        j["per_image"].push_back(std::move(r));
    }
    j["aggregate"] = {
        {"n_images", report.aggregate.n_images},
        {"rmse", report.aggregate.rmse},
        {"ssim", report.aggregate.ssim},
        {"entropy", report.aggregate.entropy},
        {"uciqe", report.aggregate.uciqe},
        {"entropy_input", report.aggregate.entropy_in},
        {"uciqe_input", report.aggregate.uciqe_in},
        {"mean_total_s", report.aggregate.mean_total_s},
    };
    if (report.accuracy) {
        j["aggregate"]["accuracy"] = {
            {"n_annotated", report.accuracy->n_annotated},
            {"n_accurate", report.accuracy->n_accurate},
            {"accuracy", report.accuracy->accuracy},
            {"mae", {report.accuracy->mae_r, report.accuracy->mae_g, report.accuracy->mae_b}},
        };
    }
    j["skipped"] = report.skipped;
    return j.dump(2) + "\n";
}

void write_report(const CorpusReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << report_to_json(report);
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace uwimg
