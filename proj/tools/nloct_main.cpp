// nloct: simulation and analysis front end for infrared interferometric
// measurements detected on the visible side of a down-conversion pair.
//
// Subcommands: tune | simulate | analyze | image.
// Exit codes: 0 success, 2 validation, 3 no-solution / geometry mismatch,
// 4 I/O failure.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nloct/errors.hpp"
#include "nloct/io.hpp"
#include "nloct/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20200617;

struct RunConfig {
    json root;
    fs::path config_dir;
    std::string raw_text;
    std::uint64_t seed = kDefaultSeed;
    fs::path output_dir = "nloct_out";
    nloct::MaterialDb materials = nloct::MaterialDb::builtin();
    std::uint64_t hash = 0;
};

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override,
                      std::optional<std::string> out_override) {
    std::ifstream in(path);
    if (!in) {
        throw nloct::IoError("cannot open config: " + path);
    }
    RunConfig cfg;
    cfg.raw_text.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        cfg.root = json::parse(cfg.raw_text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw nloct::IoError("config parse failure (" + path + "): " + e.what());
    }
    cfg.config_dir = fs::path(path).parent_path();
    cfg.seed = cfg.root.value("seed", kDefaultSeed);
    if (seed_override) {
        cfg.seed = *seed_override;
    }
    cfg.output_dir = cfg.root.value("output_dir", std::string("nloct_out"));
    if (out_override) {
        cfg.output_dir = *out_override;
    }
    const std::string materials_path = cfg.root.value("materials", std::string());
    if (!materials_path.empty()) {
        cfg.materials = nloct::MaterialDb::load((cfg.config_dir / materials_path).string());
    }
    cfg.hash = nloct::fnv1a_hash(cfg.raw_text + "|seed=" + std::to_string(cfg.seed));
    return cfg;
}

fs::path resolve(const RunConfig& cfg, const std::string& rel) {
    const fs::path p(rel);
    return p.is_absolute() ? p : cfg.config_dir / p;
}

nloct::SpdcConfig parse_spdc(const json& j) {
    nloct::SpdcConfig c;
    c.pump_wavelength_m = j.at("pump_nm").get<double>() * nloct::kNm;
    c.poling_period_m = j.at("poling_period_um").get<double>() * nloct::kUm;
    c.temperature_k = j.at("temperature_k").get<double>();
    c.crystal_length_m = j.value("crystal_length_mm", 1.0) * nloct::kMm;
    c.material_id = j.value("material", std::string("mgo_cln_5pct"));
    return c;
}

nloct::ScanConfig parse_scan(const json& root, std::uint64_t seed) {
    nloct::ScanConfig scan;
    const json j = root.value("scan", json::object());
    scan.z_start_m = j.value("z_start_mm", -0.3) * nloct::kMm;
    scan.z_end_m = j.value("z_end_mm", 0.3) * nloct::kMm;
    scan.coarse_step_m = j.value("coarse_step_um", 3.0) * nloct::kUm;
    scan.fine_step_m = j.value("fine_step_nm", 0.0) * nloct::kNm;
    scan.samples_per_point = j.value("samples_per_point", 1);
    scan.mean_counts = j.value("mean_counts", 1e4);
    const std::string noise = j.value("noise", std::string("none"));
    if (noise == "none") {
        scan.noise = nloct::NoiseModel::None;
    } else if (noise == "poisson") {
        scan.noise = nloct::NoiseModel::Poisson;
    } else {
        throw nloct::ValidationError("unknown noise model: " + noise);
    }
    const std::string convention = j.value("convention", std::string("physical"));
    if (convention == "physical") {
        scan.fringe_convention = nloct::FringeConvention::Physical;
    } else if (convention == "paper") {
        scan.fringe_convention = nloct::FringeConvention::Paper;
    } else {
        throw nloct::ValidationError("unknown fringe convention: " + convention);
    }
    scan.rng_seed = seed;
    return scan;
}

struct Source {
    nloct::WavelengthPair pair;
    nloct::CorrelationFunction mu;
    double idler_fwhm_m = 0.0;
};

Source make_source(const RunConfig& cfg) {
    Source source;
    const json j = cfg.root.value("source", json::object());
    const std::string mode = j.value("mode", j.contains("signal_nm") ? "direct" : "tuned");
    if (mode == "direct") {
        source.pair.signal_m = j.at("signal_nm").get<double>() * nloct::kNm;
        source.pair.idler_m = j.at("idler_nm").get<double>() * nloct::kNm;
        source.idler_fwhm_m = j.at("idler_fwhm_nm").get<double>() * nloct::kNm;
        const double alpha =
            nloct::sinc2_alpha_from_bandwidth(source.pair.idler_m, source.idler_fwhm_m);
        source.mu = nloct::correlation_function(nloct::sinc2_spectrum(alpha));
    } else if (mode == "tuned") {
        const auto spdc = parse_spdc(cfg.root.at("spdc"));
        const auto sol = nloct::solve_qpm(spdc, cfg.materials);
        source.pair = sol.pair;
        const auto spectrum = nloct::spdc_spectrum(spdc, sol.pair, 4096, 8.0, cfg.materials);
        source.idler_fwhm_m = nloct::spectrum_fwhm_wavelength(spectrum, sol.pair.idler_m);
        source.mu = nloct::correlation_function(spectrum);
    } else {
        throw nloct::ValidationError("unknown source mode: " + mode);
    }
    return source;
}

std::optional<nloct::EstimateOptions> parse_estimate(const json& analysis) {
    const std::string geometry = analysis.value("geometry", std::string("none"));
    if (geometry == "none") {
        return std::nullopt;
    }
    nloct::EstimateOptions est;
    if (geometry == "single_window") {
        est.geometry = nloct::Geometry::SingleWindow;
    } else if (geometry == "compound_waveplate") {
        est.geometry = nloct::Geometry::CompoundWaveplate;
    } else {
        throw nloct::ValidationError("unknown geometry: " + geometry);
    }
    est.reference_visibility = {analysis.value("reference_visibility", 1.0),
                                analysis.value("reference_sigma", 0.0)};
    est.reference_amplitude = analysis.value("reference_amplitude", 1.0);
    est.plate1_thickness_m = {analysis.value("plate1_um", 0.0) * nloct::kUm,
                              analysis.value("plate1_sigma_um", 0.0) * nloct::kUm};
    est.plate2_thickness_m = {analysis.value("plate2_um", 0.0) * nloct::kUm,
                              analysis.value("plate2_sigma_um", 0.0) * nloct::kUm};
    return est;
}

void remove_outputs(const std::vector<fs::path>& written) {
    for (const auto& p : written) {
        std::error_code ec;
        fs::remove(p, ec);
    }
}

int cmd_tune(const RunConfig& cfg) {
    std::vector<nloct::SpdcConfig> rows;
    if (cfg.root.contains("tune_rows")) {
        for (const auto& j : cfg.root.at("tune_rows")) {
            rows.push_back(parse_spdc(j));
        }
    } else {
        rows.push_back(parse_spdc(cfg.root.at("spdc")));
    }

    fs::create_directories(cfg.output_dir);
    json report;
    report["rows"] = json::array();
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, cfg.hash);
    report["provenance"] = {{"config_hash", hash}, {"version", nloct::kToolVersion}};

    std::printf("%10s %18s %18s %12s %8s %10s\n", "pump, nm", "detected, nm", "probe, nm",
                "l_coh, um", "T, K", "period, um");
    for (const auto& spdc : rows) {
        const auto sol = nloct::solve_qpm(spdc, cfg.materials);
        const auto spectrum = nloct::spdc_spectrum(spdc, sol.pair, 4096, 8.0, cfg.materials);
        const double fwhm_idler = nloct::spectrum_fwhm_wavelength(spectrum, sol.pair.idler_m);
        const double fwhm_signal = nloct::spectrum_fwhm_wavelength(spectrum, sol.pair.signal_m);
        const double l_coh = nloct::coherence_length(sol.pair.idler_m, fwhm_idler);

        std::printf("%10.1f %11.1f (%4.1f) %11.1f (%4.1f) %12.1f %8.1f %10.2f\n",
                    spdc.pump_wavelength_m / nloct::kNm, sol.pair.signal_m / nloct::kNm,
                    fwhm_signal / nloct::kNm, sol.pair.idler_m / nloct::kNm,
                    fwhm_idler / nloct::kNm, l_coh / nloct::kUm, spdc.temperature_k,
                    spdc.poling_period_m / nloct::kUm);
        if (sol.multiple_brackets) {
            std::printf("  warning: several phase-matched roots; smallest signal returned\n");
        }
        report["rows"].push_back({{"pump_nm", spdc.pump_wavelength_m / nloct::kNm},
                                  {"signal_nm", sol.pair.signal_m / nloct::kNm},
                                  {"signal_fwhm_nm", fwhm_signal / nloct::kNm},
                                  {"idler_nm", sol.pair.idler_m / nloct::kNm},
                                  {"idler_fwhm_nm", fwhm_idler / nloct::kNm},
                                  {"coherence_length_um", l_coh / nloct::kUm},
                                  {"temperature_k", spdc.temperature_k},
                                  {"poling_period_um", spdc.poling_period_m / nloct::kUm},
                                  {"qpm_residual_rad_per_m", sol.residual_rad_per_m},
                                  {"multiple_roots", sol.multiple_brackets}});
    }
    std::ofstream out(cfg.output_dir / "tune_report.json");
    out << report.dump(2) << '\n';
    std::printf("wrote %s\n", (cfg.output_dir / "tune_report.json").string().c_str());
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    const auto stack =
        nloct::load_sample(resolve(cfg, cfg.root.at("sample").get<std::string>()).string());
    const int max_order = cfg.root.value("max_echo_order", 2);
    const auto echoes = nloct::visibility_chain(stack, max_order);
    const auto source = make_source(cfg);
    const auto scan = parse_scan(cfg.root, cfg.seed);

    const auto run = nloct::simulate_run(echoes, source.mu, source.pair, scan);
    fs::create_directories(cfg.output_dir);
    const std::string label = stack.label.empty() ? "sample" : stack.label;

    std::vector<fs::path> written;
    try {
        nloct::TraceFileMeta meta;
        meta.config_hash = cfg.hash;
        auto coarse = run.coarse;
        coarse.meta.provenance = label;
        const fs::path coarse_path = cfg.output_dir / (label + "_coarse.csv");
        nloct::write_trace_csv(coarse_path.string(), coarse, meta);
        written.push_back(coarse_path);
        for (std::size_t i = 0; i < run.fine_scans.size(); ++i) {
            auto fine = run.fine_scans[i];
            fine.meta.provenance = label;
            char name[64];
            std::snprintf(name, sizeof(name), "%s_fine_%03zu.csv", label.c_str(), i);
            const fs::path fine_path = cfg.output_dir / name;
            nloct::write_trace_csv(fine_path.string(), fine, meta);
            written.push_back(fine_path);
        }
    } catch (...) {
        remove_outputs(written);
        throw;
    }
    std::printf("wrote %zu trace files under %s (coarse + %zu fine)\n", written.size(),
                cfg.output_dir.string().c_str(), run.fine_scans.size());
    return 0;
}

int cmd_analyze(const RunConfig& cfg, std::string trace_arg, std::string geometry_flag) {
    fs::path coarse_path(trace_arg);
    if (trace_arg.empty()) {
        throw nloct::ValidationError("analyze needs --trace (coarse CSV or run directory)");
    }
    if (fs::is_directory(coarse_path)) {
        std::vector<fs::path> candidates;
        for (const auto& entry : fs::directory_iterator(coarse_path)) {
            const std::string name = entry.path().filename().string();
            if (name.size() > 11 && name.substr(name.size() - 11) == "_coarse.csv") {
                candidates.push_back(entry.path());
            }
        }
        if (candidates.size() != 1) {
            throw nloct::IoError("expected exactly one *_coarse.csv in " + trace_arg);
        }
        coarse_path = candidates.front();
    }
    const auto coarse = nloct::read_trace_csv(coarse_path.string());

    // Fine scans follow the <base>_fine_NNN.csv naming next to the coarse file.
    std::vector<nloct::Interferogram> fines;
    const std::string coarse_name = coarse_path.filename().string();
    if (coarse_name.size() > 11) {
        const std::string base = coarse_name.substr(0, coarse_name.size() - 11);
        std::vector<fs::path> fine_paths;
        for (const auto& entry : fs::directory_iterator(coarse_path.parent_path())) {
            const std::string name = entry.path().filename().string();
            if (name.rfind(base + "_fine_", 0) == 0) {
                fine_paths.push_back(entry.path());
            }
        }
        std::sort(fine_paths.begin(), fine_paths.end());
        for (const auto& p : fine_paths) {
            fines.push_back(nloct::read_trace_csv(p.string()));
        }
    }

    json analysis = cfg.root.value("analysis", json::object());
    if (!geometry_flag.empty()) {
        analysis["geometry"] = geometry_flag;
    }
    nloct::AnalyzeOptions options;
    options.detect.min_visibility = analysis.value("min_visibility", 0.05);
    if (analysis.contains("reference_visibility")) {
        options.detect.reference_visibility = analysis["reference_visibility"].get<double>();
    }
    if (cfg.root.contains("source") || cfg.root.contains("spdc")) {
        options.detect.source_mu = make_source(cfg).mu;  // known model for the fits
    }
    options.estimate = parse_estimate(analysis);

    const auto result = nloct::analyze_run(coarse, fines, options);

    fs::create_directories(cfg.output_dir);
    nloct::ReportContext context;
    context.trace_path = coarse_path.string();
    context.config_hash = cfg.hash;
    const fs::path report_path = cfg.output_dir / "analysis_report.json";
    nloct::write_report_json(report_path.string(), result, context);

    std::printf("%zu peak(s)%s\n", result.report.peaks.size(),
                result.report.coarse_mode ? " [coarse mode]" : "");
    for (const auto& p : result.report.peaks) {
        const char* cls = p.classification == nloct::PeakClass::Surface ? "surface"
                          : p.classification == nloct::PeakClass::Echo ? "echo"
                                                                       : "unknown";
        std::printf("  z = %9.4f mm  V = %.4f +/- %.4f  [%s]\n", p.position_m / nloct::kMm,
                    p.visibility, p.visibility_sigma, cls);
    }
    if (result.estimate) {
        const auto& e = *result.estimate;
        std::printf("R = %.4f +/- %.4f, n = %.4f +/- %.4f, d = %.1f +/- %.1f um\n",
                    e.reflectance.value, e.reflectance.sigma, e.refractive_index.value,
                    e.refractive_index.sigma, e.thickness_m.value / nloct::kUm,
                    e.thickness_m.sigma / nloct::kUm);
        if (e.birefringence) {
            std::printf("n_o = %.4f +/- %.4f, n_e = %.4f +/- %.4f\n",
                        e.birefringence->first.value, e.birefringence->first.sigma,
                        e.birefringence->second.value, e.birefringence->second.sigma);
        }
    }
    std::printf("wrote %s\n", report_path.string().c_str());
    return 0;
}

int cmd_image(const RunConfig& cfg, std::string mask_flag) {
    const json j = cfg.root.value("image", json::object());
    nloct::ReflectanceMask mask;
    std::string mask_path = !mask_flag.empty() ? mask_flag : j.value("mask", std::string());
    if (!mask_path.empty()) {
        mask = nloct::load_mask(resolve(cfg, mask_path).string());
    } else {
        mask = nloct::make_bar_target(
            j.value("bar_width_um", 88.0) * nloct::kUm, j.value("bar_pitch_um", 2.0) * nloct::kUm,
            j.value("n_bars", 3), j.value("gap_um", 0.0) * nloct::kUm,
            j.value("field_reflectance", 0.63), j.value("bar_reflectance", 0.0),
            j.value("margin_um", 0.0) * nloct::kUm);
    }

    nloct::BeamProfile beam{j.value("beam_fwhm_um", 50.0) * nloct::kUm};
    nloct::RasterOptions options;
    options.step_m = j.value("step_um", 10.0) * nloct::kUm;
    options.pipeline = j.value("pipeline", std::string("fast")) == "full"
                           ? nloct::ImagingPipeline::Full
                           : nloct::ImagingPipeline::Fast;
    options.base_seed = cfg.seed;
    options.reference_visibility = j.value("reference_visibility", 1.0);
    options.probe_depth_m = j.value("probe_depth_mm", 0.0) * nloct::kMm;
    const std::string cover = j.value("cover", std::string());
    if (!cover.empty()) {
        options.cover = nloct::load_sample(resolve(cfg, cover).string());
    }
    if (options.pipeline == nloct::ImagingPipeline::Full) {
        const auto source = make_source(cfg);
        options.pair = source.pair;
        options.mu = source.mu;
        const auto scan = parse_scan(cfg.root, cfg.seed);
        options.noise = scan.noise;
        options.mean_counts = scan.mean_counts;
        options.convention = scan.fringe_convention;
    }

    const auto image = nloct::raster_scan(mask, beam, options);
    fs::create_directories(cfg.output_dir);
    nloct::TraceFileMeta meta;
    meta.config_hash = cfg.hash;
    nloct::write_image_grid((cfg.output_dir / "image_grid.txt").string(), image, meta);
    nloct::write_image_csv((cfg.output_dir / "image.csv").string(), image, meta);
    std::printf("wrote %s and %s (%dx%d pixels)\n",
                (cfg.output_dir / "image_grid.txt").string().c_str(),
                (cfg.output_dir / "image.csv").string().c_str(), image.width, image.height);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Infrared interferometric measurement toolkit (visible-photon detection)"};
    app.set_version_flag("--version", nloct::kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::string trace_arg;
    std::string geometry_flag;
    std::string mask_flag;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration JSON")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_override, "override the output directory");
    };

    auto* tune = app.add_subcommand("tune", "solve the phase-matched wavelength pairs");
    add_common(tune);
    auto* simulate = app.add_subcommand("simulate", "synthesize interferogram traces");
    add_common(simulate);
    auto* analyze = app.add_subcommand("analyze", "detect peaks and estimate material values");
    add_common(analyze);
    analyze->add_option("--trace", trace_arg, "coarse trace CSV or run directory");
    analyze->add_option("--geometry", geometry_flag,
                        "single_window | compound_waveplate | none");
    auto* image = app.add_subcommand("image", "raster-scan a reflectance mask");
    add_common(image);
    image->add_option("--mask", mask_flag, "mask grid file (overrides the generator)");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load_config(config_path, seed_override, out_override);
        if (tune->parsed()) {
            return cmd_tune(cfg);
        }
        if (simulate->parsed()) {
            return cmd_simulate(cfg);
        }
        if (analyze->parsed()) {
            if (trace_arg.empty()) {
                trace_arg = (cfg.output_dir).string();  // default: analyze own simulate output
            }
            return cmd_analyze(cfg, trace_arg, geometry_flag);
        }
        if (image->parsed()) {
            return cmd_image(cfg, mask_flag);
        }
    } catch (const nloct::NoSolutionError& e) {
        std::fprintf(stderr, "no solution: %s\n", e.what());
        return 3;
    } catch (const nloct::GeometryError& e) {
        std::fprintf(stderr, "geometry mismatch: %s\n", e.what());
        return 3;
    } catch (const nloct::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const nloct::ValidationError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
