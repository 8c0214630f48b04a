#include "uwimg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "uwimg/backlight.hpp"
#include "uwimg/enhance.hpp"
#include "uwimg/evalkit.hpp"
#include "uwimg/image.hpp"
#include "uwimg/metrics.hpp"
#include "uwimg/transmission.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace uwimg::cli {

namespace {

// Bad flag values detected after CLI11 parsing still count as usage errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool parse_double_strict(const std::string& s, double& v) {
    try {
        std::size_t pos = 0;
        v = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
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

// "r,g,b" on the 0-255 scale -> normalized BackgroundLight
BackgroundLight parse_bl_triple(const std::string& s) {
    const auto parts = split(s, ',');
    double v[3];
    if (parts.size() != 3) throw UsageError("--bl expects r,g,b (0-255)");
    for (int i = 0; i < 3; ++i) {
        if (!parse_double_strict(parts[static_cast<std::size_t>(i)], v[i]) || v[i] < 0.0 ||
            v[i] > 255.0)
            throw UsageError("--bl channel values must be numbers in [0, 255]");
    }
    return {v[0] / 255.0, v[1] / 255.0, v[2] / 255.0};
}

AttenuationProfile parse_nrer_triple(const std::string& s) {
    const auto parts = split(s, ',');
    double v[3];
    if (parts.size() != 3) throw UsageError("--nrer expects r,g,b ratios in (0,1)");
    for (int i = 0; i < 3; ++i) {
        if (!parse_double_strict(parts[static_cast<std::size_t>(i)], v[i]) || !(v[i] > 0.0) ||
            !(v[i] < 1.0))
            throw UsageError("--nrer ratios must lie in (0, 1)");
    }
    return {v[0], v[1], v[2]};
}

std::pair<int, int> parse_size(const std::string& s, const char* flag) {
    const auto x = s.find('x');
    int w = 0, h = 0;
    if (x != std::string::npos) {
        try {
            std::size_t p1 = 0, p2 = 0;
            w = std::stoi(s.substr(0, x), &p1);
            h = std::stoi(s.substr(x + 1), &p2);
            if (p1 == x && p2 == s.size() - x - 1 && w > 0 && h > 0) return {w, h};
        } catch (...) {
        }
    }
    throw UsageError(std::string(flag) + " expects WxH with positive integers");
}

BlMethod parse_bl_method_or_die(const std::string& s) {
    BlMethod m{};
    if (!parse_bl_method(s, m)) throw UsageError("unknown background-light method: " + s);
    return m;
}

TmMethod parse_tm_method_or_die(const std::string& s) {
    TmMethod m{};
    if (!parse_tm_method(s, m)) throw UsageError("unknown transmission method: " + s);
    return m;
}

json timings_json(const StageTimings& t) {
    return {{"bl_s", t.bl_s},
            {"tm_s", t.tm_s},
            {"restore_s", t.restore_s},
            {"color_s", t.color_s},
            {"total_s", t.total_s}};
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error(path + ": cannot open for writing");
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error(path + ": write failed");
}

// ---- enhance ------------------------------------------------------------

struct EnhanceArgs {
    std::string input, output;
    std::string bl_method = "statistical";
    std::string tm_method = "nudcp";
    double lambda = 0.7;
    double lambda_v = 0.25;
    double t_floor = 0.2;
    double t_ceil = 0.9;
    double dark_prior = 0.1;
    double d_inf = 10.0;
    int window_radius = 4;
    int guided_radius = 16;
    double guided_epsilon = 1e-3;
    std::string nrer = "0.83,0.95,0.97";
    bool no_color_correction = false;
    std::string resize;
    std::string fixed_bl;
    std::string fixed_t;
    std::string intermediates_dir;
    std::string report_path;
};

void add_enhance(CLI::App& app, EnhanceArgs& a, std::ostream& out) {
    auto* sub = app.add_subcommand("enhance", "restore and color-balance an underwater image");
    sub->add_option("input", a.input, "input image (PNG or binary PPM)")->required();
    sub->add_option("output", a.output, "output image path (.png or .ppm)")->required();
    sub->add_option("--bl-method", a.bl_method, "background-light estimator")
        ->capture_default_str()
        ->check(CLI::IsMember({"statistical", "dcp", "udcp", "mip", "quadtree", "blurriness"}));
    sub->add_option("--tm-method", a.tm_method, "transmission-map method")
        ->capture_default_str()
        ->check(CLI::IsMember({"nudcp", "dcp", "udcp", "mip"}));
    sub->add_option("--lambda", a.lambda, "reverse-saturation fusion weight")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--lambda-v", a.lambda_v, "color-correction regularizer")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--t-floor", a.t_floor, "transmission lower clamp in the inversion")
        ->capture_default_str();
    sub->add_option("--t-ceil", a.t_ceil, "transmission upper clamp in the inversion")
        ->capture_default_str();
    sub->add_option("--dark-prior", a.dark_prior, "residual haze kept by the dark-channel model")
        ->capture_default_str();
    sub->add_option("--d-inf", a.d_inf, "depth scale (meters at relative depth 1)")
        ->capture_default_str();
    sub->add_option("--window-radius", a.window_radius, "dark-channel window radius")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--guided-radius", a.guided_radius, "guided-filter window radius")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--guided-epsilon", a.guided_epsilon, "guided-filter regularizer")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--nrer", a.nrer, "per-channel attenuation ratios r,g,b")
        ->capture_default_str();
    sub->add_flag("--no-color-correction", a.no_color_correction,
                  "skip the white-balance stage");
    sub->add_option("--resize", a.resize, "resize input to WxH before processing");
    sub->add_option("--bl", a.fixed_bl, "fixed background light r,g,b (0-255), skips estimation");
    sub->add_option("--t", a.fixed_t,
                    "fixed constant transmission in (0,1], skips map construction");
    sub->add_option("--save-intermediates", a.intermediates_dir,
                    "directory for depth/t_r/t_g/t_b/rsm/restored dumps");
    sub->add_option("--report", a.report_path, "write a JSON run report");

    sub->callback([&a, &out] {
        PipelineParams p;
        p.bl_method = parse_bl_method_or_die(a.bl_method);
        p.tm_method = parse_tm_method_or_die(a.tm_method);
        p.tm.lambda_arsm = a.lambda;
        p.tm.dark_prior = a.dark_prior;
        p.tm.d_inf = a.d_inf;
        p.tm.patch.radius = a.window_radius;
        p.tm.guided = {a.guided_radius, a.guided_epsilon};
        p.profile = parse_nrer_triple(a.nrer);
        p.enhance.t_floor = a.t_floor;
        p.enhance.t_ceil = a.t_ceil;
        p.enhance.lambda_v = a.lambda_v;
        p.enhance.color_correction = !a.no_color_correction;
        if (!(p.enhance.t_floor > 0.0 && p.enhance.t_floor <= p.enhance.t_ceil &&
              p.enhance.t_ceil <= 1.0))
            throw UsageError("need 0 < --t-floor <= --t-ceil <= 1");
        if (!a.fixed_bl.empty()) p.fixed_bl = parse_bl_triple(a.fixed_bl);
        if (!a.fixed_t.empty()) {
            double t = 0.0;
            if (!parse_double_strict(a.fixed_t, t) || !(t > 0.0 && t <= 1.0))
                throw UsageError("enhance --t expects a constant transmission in (0, 1]");
            p.fixed_t = t;
        }

        ImageBuf img = load_image(a.input);
        if (!a.resize.empty()) {
            const auto [w, h] = parse_size(a.resize, "--resize");
            img = resize_bilinear(img, w, h);
        }

        const PipelineResult res = enhance_pipeline(img, p);
        save_image(res.enhanced, a.output);

        if (!a.intermediates_dir.empty()) {
            fs::create_directories(a.intermediates_dir);
            const fs::path d(a.intermediates_dir);
            save_image(gray_image(res.depth), (d / "depth.png").string());
            save_image(gray_image(res.tms.t_r), (d / "t_r.png").string());
            save_image(gray_image(res.tms.t_g), (d / "t_g.png").string());
            save_image(gray_image(res.tms.t_b), (d / "t_b.png").string());
            save_image(gray_image(arsm(img, a.lambda)), (d / "rsm.png").string());
            save_image(res.restored, (d / "restored.png").string());
        }

        if (!a.report_path.empty()) {
            json j;
            j["input"] = a.input;
            j["output"] = a.output;
            j["params"] = {
                {"bl_method", a.bl_method},
                {"tm_method", a.tm_method},
                {"lambda", a.lambda},
                {"lambda_v", a.lambda_v},
                {"t_floor", a.t_floor},
                {"t_ceil", a.t_ceil},
                {"dark_prior", a.dark_prior},
                {"d_inf", a.d_inf},
                {"window_radius", a.window_radius},
                {"guided_radius", a.guided_radius},
                {"guided_epsilon", a.guided_epsilon},
                {"nrer", a.nrer},
                {"color_correction", !a.no_color_correction},
            };
            j["bl"] = {quantize8(res.bl.b_r), quantize8(res.bl.b_g), quantize8(res.bl.b_b)};
            j["bl_normalized"] = {res.bl.b_r, res.bl.b_g, res.bl.b_b};
            j["color_corrected"] = res.color_corrected;
            j["timings"] = timings_json(res.timings);
            json metrics = {
                {"rmse", rmse(res.enhanced, img)},
                {"entropy", entropy(res.enhanced)},
                {"uciqe", uciqe(res.enhanced)},
                {"entropy_input", entropy(img)},
                {"uciqe_input", uciqe(img)},
            };
            metrics["ssim"] = (img.width >= 11 && img.height >= 11)
                                  ? json(ssim(res.enhanced, img))
                                  : json(nullptr);
            j["metrics"] = std::move(metrics);
            write_json_file(j, a.report_path);
        }

        out << "enhanced " << a.input << " -> " << a.output << "  bl="
            << static_cast<int>(quantize8(res.bl.b_r)) << ","
            << static_cast<int>(quantize8(res.bl.b_g)) << ","
            << static_cast<int>(quantize8(res.bl.b_b)) << "  total_s="
            << res.timings.total_s << "\n";
    });
}

// ---- estimate-bl ----------------------------------------------------------

struct EstimateArgs {
    std::string input;
    std::string method = "statistical";
};

void add_estimate(CLI::App& app, EstimateArgs& a, std::ostream& out) {
    auto* sub = app.add_subcommand("estimate-bl", "estimate the background light of an image");
    sub->add_option("input", a.input, "input image (PNG or binary PPM)")->required();
    sub->add_option("--method", a.method, "background-light estimator")
        ->capture_default_str()
        ->check(CLI::IsMember({"statistical", "dcp", "udcp", "mip", "quadtree", "blurriness"}));

    sub->callback([&a, &out] {
        const ImageBuf img = load_image(a.input);
        const TimedBl res = estimate_bl(img, parse_bl_method_or_die(a.method));
        out << static_cast<int>(quantize8(res.bl.b_r)) << " "
            << static_cast<int>(quantize8(res.bl.b_g)) << " "
            << static_cast<int>(quantize8(res.bl.b_b)) << "\n";
        out << "normalized: " << std::fixed << std::setprecision(6) << res.bl.b_r << " "
            << res.bl.b_g << " " << res.bl.b_b << "\n";
        out << "elapsed_s: " << std::setprecision(6) << res.seconds << "\n";
        out.unsetf(std::ios::fixed);
    });
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string dir;
    std::string annotations;
    std::string bl_method = "statistical";
    std::string tm_method = "nudcp";
    std::string report_path;
    int jobs = 0;
    bool no_reference = false;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    auto* sub = app.add_subcommand("evaluate", "run the pipeline over a corpus and score it");
    sub->add_option("dir", a.dir, "directory of images")->required();
    sub->add_option("--annotations", a.annotations,
                    "CSV of ground-truth background lights (image_id,b_r,b_g,b_b)");
    sub->add_option("--method", a.bl_method, "background-light estimator")
        ->capture_default_str()
        ->check(CLI::IsMember({"statistical", "dcp", "udcp", "mip", "quadtree", "blurriness"}));
    sub->add_option("--tm-method", a.tm_method, "transmission-map method")
        ->capture_default_str()
        ->check(CLI::IsMember({"nudcp", "dcp", "udcp", "mip"}));
    sub->add_option("--report", a.report_path, "write the JSON report here");
    sub->add_option("--jobs", a.jobs, "worker threads (0 = all cores)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--no-reference-metrics", a.no_reference,
                  "skip rmse/ssim of output vs input");

    sub->callback([&a, &out, &err] {
        EvaluateOptions opts;
        opts.pipeline.bl_method = parse_bl_method_or_die(a.bl_method);
        opts.pipeline.tm_method = parse_tm_method_or_die(a.tm_method);
        opts.annotations_path = a.annotations;
        opts.full_reference = !a.no_reference;
        opts.jobs = a.jobs;

        const CorpusReport rep = evaluate_corpus(a.dir, opts, &err);

        out << "images: " << rep.aggregate.n_images;
        if (!rep.skipped.empty()) out << " (skipped " << rep.skipped.size() << ")";
        out << "\n";
        if (rep.aggregate.n_images > 0) {
            out << std::fixed << std::setprecision(4);
            if (opts.full_reference)
                out << "mean rmse: " << rep.aggregate.rmse
                    << "  mean ssim: " << rep.aggregate.ssim << "\n";
            out << "mean entropy: " << rep.aggregate.entropy_in << " -> "
                << rep.aggregate.entropy << "\n";
            out << "mean uciqe:   " << rep.aggregate.uciqe_in << " -> " << rep.aggregate.uciqe
                << "\n";
            out.unsetf(std::ios::fixed);
        }
        if (rep.accuracy && rep.accuracy->n_annotated > 0) {
            out << "bl accuracy: " << rep.accuracy->n_accurate << "/"
                << rep.accuracy->n_annotated << " = " << rep.accuracy->accuracy << "\n";
        }
        if (!a.report_path.empty()) write_report(rep, a.report_path);
    });
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
    std::string sizes = "400x600,800x1200";
    std::string methods = "statistical,dcp,udcp,mip,quadtree,blurriness";
    int reps = 5;
    std::uint64_t seed = 42;
    std::string report_path;
};

void add_bench(CLI::App& app, BenchArgs& a, std::ostream& out) {
    auto* sub = app.add_subcommand("bench", "time the background-light estimators");
    sub->add_option("--sizes", a.sizes, "comma-separated WxH list")->capture_default_str();
    sub->add_option("--methods", a.methods, "comma-separated estimator list")
        ->capture_default_str();
    sub->add_option("--reps", a.reps, "repetitions per cell (median reported)")
        ->capture_default_str()
        ->check(CLI::Range(3, 1000));
    sub->add_option("--seed", a.seed, "seed for the generated test images")
        ->capture_default_str();
    sub->add_option("--report", a.report_path, "write JSON rows here");

    sub->callback([&a, &out] {
        std::vector<std::pair<int, int>> sizes;
        for (const auto& s : split(a.sizes, ',')) sizes.push_back(parse_size(s, "--sizes"));
        std::vector<BlMethod> methods;
        for (const auto& s : split(a.methods, ','))
            methods.push_back(parse_bl_method_or_die(s));

        const std::vector<BenchRow> rows = bench_bl(sizes, methods, a.reps, a.seed);

        out << std::left << std::setw(12) << "size" << std::setw(14) << "method"
            << std::right << std::setw(12) << "median_s" << std::setw(12) << "best_s"
            << "  bl\n";
        json jrows = json::array();
        for (const auto& r : rows) {
            std::ostringstream size_s;
            size_s << r.width << "x" << r.height;
            out << std::left << std::setw(12) << size_s.str() << std::setw(14)
                << to_string(r.method) << std::right << std::fixed << std::setprecision(6)
                << std::setw(12) << r.median_s << std::setw(12) << r.best_s << "  "
                << static_cast<int>(quantize8(r.bl.b_r)) << ","
                << static_cast<int>(quantize8(r.bl.b_g)) << ","
                << static_cast<int>(quantize8(r.bl.b_b)) << "\n";
            out.unsetf(std::ios::fixed);
            jrows.push_back({{"width", r.width},
                             {"height", r.height},
                             {"method", to_string(r.method)},
                             {"median_s", r.median_s},
                             {"best_s", r.best_s},
                             {"bl", {r.bl.b_r, r.bl.b_g, r.bl.b_b}}});
        }
        if (!a.report_path.empty()) write_json_file(jrows, a.report_path);
    });
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
    std::string clear, output;
    std::string bl;
    std::string t;
    std::string nrer = "0.83,0.95,0.97";
    double d_inf = 10.0;
};

void add_synth(CLI::App& app, SynthArgs& a, std::ostream& out) {
    auto* sub = app.add_subcommand("synth", "forward-haze a clear image with known B and t");
    sub->add_option("clear", a.clear, "clear input image")->required();
    sub->add_option("output", a.output, "hazy output path")->required();
    sub->add_option("--bl", a.bl, "background light r,g,b (0-255)")->required();
    sub->add_option("--t", a.t, "constant transmission in (0,1], or a depth-map image path")
        ->required();
    sub->add_option("--nrer", a.nrer, "attenuation ratios r,g,b (depth-map mode)")
        ->capture_default_str();
    sub->add_option("--d-inf", a.d_inf, "depth scale (depth-map mode)")->capture_default_str();

    sub->callback([&a, &out] {
        const BackgroundLight bl = parse_bl_triple(a.bl);
        const ImageBuf clear = load_image(a.clear);

        ImageBuf hazy;
        double t_const = 0.0;
        if (parse_double_strict(a.t, t_const)) {
            if (!(t_const > 0.0 && t_const <= 1.0))
                throw UsageError("synth --t constant must lie in (0, 1]");
            hazy = synth_haze(clear, bl, t_const);
        } else {
            const AttenuationProfile prof = parse_nrer_triple(a.nrer);
            const ImageBuf depth_img = load_image(a.t);
            if (depth_img.width != clear.width || depth_img.height != clear.height)
                throw std::runtime_error("depth map dimensions differ from the clear image");
            const ScalarMap depth = to_grayscale(depth_img);
            TmParams p;
            p.d_inf = a.d_inf;
            TransmissionSet tms;
            tms.t_r = tm_from_depth(depth, 0.0, prof.nrer_r, p);
            tms.t_g = tm_from_depth(depth, 0.0, prof.nrer_g, p);
            tms.t_b = tm_from_depth(depth, 0.0, prof.nrer_b, p);
            hazy = synth_haze(clear, bl, tms);
        }

        save_image(hazy, a.output);
        out << "synthesized " << a.output << "\n";
    });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"underwater image restoration and enhancement"};
    app.require_subcommand(1);

    EnhanceArgs enhance_args;
    EstimateArgs estimate_args;
    EvaluateArgs evaluate_args;
    BenchArgs bench_args;
    SynthArgs synth_args;

    add_enhance(app, enhance_args, out);
    add_estimate(app, estimate_args, out);
    add_evaluate(app, evaluate_args, out, err);
    add_bench(app, bench_args, out);
    add_synth(app, synth_args, out);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc) - 1 : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace uwimg::cli
