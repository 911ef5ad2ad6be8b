#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "nloct/imaging.hpp"
#include "nloct/inverse.hpp"
#include "nloct/pipeline.hpp"

namespace nloct {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit over a string; stamps outputs with the originating config.
std::uint64_t fnv1a_hash(const std::string& text);

struct TraceFileMeta {
    std::uint64_t config_hash = 0;
    std::string version = kToolVersion;
};

/// Trace CSV: '#'-prefixed key=value header (wavelengths, convention, seed,
/// provenance, config hash), then position_mm,intensity rows. Doubles are
/// written with round-trip precision, so write/read is bit-exact.
void write_trace_csv(const std::string& path, const Interferogram& trace,
                     const TraceFileMeta& meta = {});
Interferogram read_trace_csv(const std::string& path);

/// Sample description JSON: ambient index, reference reflectivity, probe
/// polarization and the layer list (label, thickness_um, n_o, n_e, tau,
/// fast_axis). Round-trips losslessly.
SampleStack load_sample(const std::string& path);
void save_sample(const std::string& path, const SampleStack& stack);

/// Plain-text mask grid: "width height pitch_um" header line, then rows of
/// reflectance values.
ReflectanceMask load_mask(const std::string& path);
void save_mask(const std::string& path, const ReflectanceMask& mask);

/// Reflectance image writers: the grid format above plus a CSV of
/// x_um, y_um, R, sigma.
void write_image_grid(const std::string& path, const ReflectanceImage& image,
                      const TraceFileMeta& meta = {});
void write_image_csv(const std::string& path, const ReflectanceImage& image,
                     const TraceFileMeta& meta = {});

struct ReportContext {
    std::string trace_path;
    std::uint64_t config_hash = 0;
    std::string version = kToolVersion;
};

/// Analysis report JSON: peaks, classifications, estimates, residuals and
/// provenance.
void write_report_json(const std::string& path, const AnalysisResult& result,
                       const ReportContext& context);

}  // namespace nloct
