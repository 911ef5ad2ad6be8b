#include "nloct/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nloct/errors.hpp"
#include "nloct/units.hpp"

namespace nloct {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return in;
}

const char* convention_name(FringeConvention c) {
    return c == FringeConvention::Physical ? "physical" : "paper";
}

FringeConvention convention_of(const std::string& name) {
    if (name == "physical") {
        return FringeConvention::Physical;
    }
    if (name == "paper") {
        return FringeConvention::Paper;
    }
    throw IoError("unknown fringe convention: " + name);
}

const char* class_name(PeakClass c) {
    switch (c) {
        case PeakClass::Surface: return "surface";
        case PeakClass::Echo: return "echo";
        case PeakClass::Unknown: return "unknown";
    }
    return "unknown";
}

nlohmann::json peak_to_json(const Peak& p) {
    return {{"position_mm", p.position_m / kMm},
            {"position_sigma_mm", p.position_sigma_m / kMm},
            {"visibility", p.visibility},
            {"visibility_sigma", p.visibility_sigma},
            {"classification", class_name(p.classification)}};
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_trace_csv(const std::string& path, const Interferogram& trace,
                     const TraceFileMeta& meta) {
    auto out = open_out(path);
    out << "# nloct trace v1\n";
    out << "# version=" << meta.version << "\n";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, meta.config_hash);
    out << "# config_hash=" << hash << "\n";
    out << "# signal_nm=" << fmt_double(trace.meta.signal_m / kNm) << "\n";
    out << "# idler_nm=" << fmt_double(trace.meta.idler_m / kNm) << "\n";
    out << "# convention=" << convention_name(trace.meta.convention) << "\n";
    out << "# seed=" << trace.meta.seed << "\n";
    out << "# noisy=" << (trace.meta.noisy ? 1 : 0) << "\n";
    out << "# provenance=" << trace.meta.provenance << "\n";
    out << "position_mm,intensity\n";
    for (std::size_t i = 0; i < trace.position_m.size(); ++i) {
        out << fmt_double(trace.position_m[i] / kMm) << ',' << fmt_double(trace.intensity[i])
            << '\n';
    }
    if (!out) {
        throw IoError("write failure: " + path);
    }
}

Interferogram read_trace_csv(const std::string& path) {
    auto in = open_in(path);
    Interferogram trace;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                continue;
            }
            std::string key = line.substr(2, eq - 2);
            std::string value = line.substr(eq + 1);
            if (key == "signal_nm") {
                trace.meta.signal_m = std::stod(value) * kNm;
            } else if (key == "idler_nm") {
                trace.meta.idler_m = std::stod(value) * kNm;
            } else if (key == "convention") {
                trace.meta.convention = convention_of(value);
            } else if (key == "seed") {
                trace.meta.seed = std::stoull(value);
            } else if (key == "noisy") {
                trace.meta.noisy = value == "1";
            } else if (key == "provenance") {
                trace.meta.provenance = value;
            }
            continue;
        }
        if (!header_done) {  // column header row
            header_done = true;
            if (line.rfind("position_mm", 0) == 0) {
                continue;
            }
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw IoError("malformed trace row in " + path + ": " + line);
        }
        try {
            trace.position_m.push_back(std::stod(line.substr(0, comma)) * kMm);
            trace.intensity.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw IoError("malformed trace row in " + path + ": " + line);
        }
    }
    if (trace.position_m.empty()) {
        throw IoError("trace file has no samples: " + path);
    }
    return trace;
}

SampleStack load_sample(const std::string& path) {
    auto in = open_in(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("sample parse failure (" + path + "): " + e.what());
    }
    SampleStack stack;
    try {
        stack.ambient_index = j.value("ambient_index", 1.0);
        stack.reference_reflectivity = j.value("reference_reflectivity", 1.0);
        stack.label = j.value("label", std::string());
        const std::string pol = j.value("probe_polarization", std::string("along_fast"));
        if (pol == "along_fast") {
            stack.probe_polarization = ProbePolarization::AlongFast;
        } else if (pol == "along_slow") {
            stack.probe_polarization = ProbePolarization::AlongSlow;
        } else if (pol == "custom_angle") {
            stack.probe_polarization = ProbePolarization::CustomAngle;
            stack.probe_angle_rad = j.at("probe_angle_deg").get<double>() * std::acos(-1.0) / 180.0;
        } else {
            throw IoError("unknown probe_polarization: " + pol);
        }
        for (const auto& lj : j.value("layers", nlohmann::json::array())) {
            Layer layer;
            layer.label = lj.value("label", std::string());
            layer.thickness_m = lj.at("thickness_um").get<double>() * kUm;
            layer.index_o = lj.at("n_o").get<double>();
            layer.index_e = lj.value("n_e", layer.index_o);
            layer.amplitude_transmission = lj.value("tau", 1.0);
            const std::string axis = lj.value("fast_axis", std::string("along_probe"));
            if (axis == "along_probe") {
                layer.fast_axis_along_probe = true;
            } else if (axis == "across_probe") {
                layer.fast_axis_along_probe = false;
            } else {
                throw IoError("unknown fast_axis: " + axis);
            }
            stack.layers.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("sample schema error (" + path + "): " + e.what());
    }
    return stack;
}

void save_sample(const std::string& path, const SampleStack& stack) {
    nlohmann::json j;
    j["ambient_index"] = stack.ambient_index;
    j["reference_reflectivity"] = stack.reference_reflectivity;
    j["label"] = stack.label;
    switch (stack.probe_polarization) {
        case ProbePolarization::AlongFast: j["probe_polarization"] = "along_fast"; break;
        case ProbePolarization::AlongSlow: j["probe_polarization"] = "along_slow"; break;
        case ProbePolarization::CustomAngle:
            j["probe_polarization"] = "custom_angle";
            j["probe_angle_deg"] = stack.probe_angle_rad * 180.0 / std::acos(-1.0);
            break;
    }
    j["layers"] = nlohmann::json::array();
    for (const auto& layer : stack.layers) {
        j["layers"].push_back({{"label", layer.label},
                               {"thickness_um", layer.thickness_m / kUm},
                               {"n_o", layer.index_o},
                               {"n_e", layer.index_e},
                               {"tau", layer.amplitude_transmission},
                               {"fast_axis",
                                layer.fast_axis_along_probe ? "along_probe" : "across_probe"}});
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

ReflectanceMask load_mask(const std::string& path) {
    auto in = open_in(path);
    ReflectanceMask mask;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream head(line);
        double pitch_um = 0.0;
        if (!(head >> mask.width >> mask.height >> pitch_um)) {
            throw IoError("mask header must be 'width height pitch_um': " + path);
        }
        mask.pitch_m = pitch_um * kUm;
        break;
    }
    mask.reflectance.reserve(static_cast<std::size_t>(mask.width) * mask.height);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream row(line);
        double v = 0.0;
        while (row >> v) {
            mask.reflectance.push_back(v);
        }
    }
    if (mask.reflectance.size() !=
        static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height)) {
        throw IoError("mask grid size mismatch in " + path);
    }
    mask.label = path;
    return mask;
}

void save_mask(const std::string& path, const ReflectanceMask& mask) {
    auto out = open_out(path);
    out << mask.width << ' ' << mask.height << ' ' << fmt_double(mask.pitch_m / kUm) << '\n';
    for (int iy = 0; iy < mask.height; ++iy) {
        for (int ix = 0; ix < mask.width; ++ix) {
            out << fmt_double(mask.at(ix, iy)) << (ix + 1 == mask.width ? '\n' : ' ');
        }
    }
}

void write_image_grid(const std::string& path, const ReflectanceImage& image,
                      const TraceFileMeta& meta) {
    auto out = open_out(path);
    out << "# nloct image v1 pipeline="
        << (image.pipeline == ImagingPipeline::Fast ? "fast" : "full")
        << " seed=" << image.base_seed << " version=" << meta.version << "\n";
    out << image.width << ' ' << image.height << ' ' << fmt_double(image.step_m / kUm) << '\n';
    for (int iy = 0; iy < image.height; ++iy) {
        for (int ix = 0; ix < image.width; ++ix) {
            out << fmt_double(image.at(ix, iy)) << (ix + 1 == image.width ? '\n' : ' ');
        }
    }
}

void write_image_csv(const std::string& path, const ReflectanceImage& image,
                     const TraceFileMeta& meta) {
    auto out = open_out(path);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, meta.config_hash);
    out << "# nloct image v1 config_hash=" << hash << " version=" << meta.version << "\n";
    out << "x_um,y_um,R,sigma\n";
    for (int iy = 0; iy < image.height; ++iy) {
        for (int ix = 0; ix < image.width; ++ix) {
            const double x = (ix + 0.5) * image.step_m / kUm;
            const double y = (iy + 0.5) * image.step_m / kUm;
            const std::size_t idx = static_cast<std::size_t>(iy) * image.width + ix;
            out << fmt_double(x) << ',' << fmt_double(y) << ',' << fmt_double(image.reflectance[idx])
                << ',' << fmt_double(image.sigma[idx]) << '\n';
        }
    }
}

void write_report_json(const std::string& path, const AnalysisResult& result,
                       const ReportContext& context) {
    nlohmann::json j;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, context.config_hash);
    j["provenance"] = {{"trace", context.trace_path},
                       {"config_hash", hash},
                       {"version", context.version}};
    j["coarse_mode"] = result.report.coarse_mode;
    j["peaks"] = nlohmann::json::array();
    for (const auto& p : result.report.peaks) {
        j["peaks"].push_back(peak_to_json(p));
    }
    if (result.estimate) {
        const auto& e = *result.estimate;
        nlohmann::json je;
        je["reflectance"] = {{"value", e.reflectance.value}, {"sigma", e.reflectance.sigma}};
        je["refractive_index"] = {{"value", e.refractive_index.value},
                                  {"sigma", e.refractive_index.sigma}};
        je["thickness_um"] = {{"value", e.thickness_m.value / kUm},
                              {"sigma", e.thickness_m.sigma / kUm}};
        if (e.birefringence) {
            je["n_o"] = {{"value", e.birefringence->first.value},
                         {"sigma", e.birefringence->first.sigma}};
            je["n_e"] = {{"value", e.birefringence->second.value},
                         {"sigma", e.birefringence->second.sigma}};
        }
        je["consistency_residual"] = e.eq_consistency_residual;
        je["peak_spacings_mm"] = nlohmann::json::array();
        for (double s : e.peak_spacings_m) {
            je["peak_spacings_mm"].push_back(s / kMm);
        }
        j["estimate"] = je;
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace nloct
