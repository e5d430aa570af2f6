#pragma once

// File formats: paths and spectra as CSV, reports as JSON. Numbers are
// written in shortest round-trip form so reports are bit-reproducible.

#include <optional>
#include <string>

#include <json.hpp>

#include "mfbm/inference.hpp"
#include "mfbm/model.hpp"
#include "mfbm/montecarlo.hpp"
#include "mfbm/wavelet.hpp"

namespace mfbm {

using Json = nlohmann::ordered_json;

/// Reads a path from CSV: one value column (needs `delta`) or (time, value)
/// with uniform spacing (relative tolerance 1e-9), in which case the spacing
/// is the step. A non-numeric first line is taken as a header. Throws
/// ArgumentError on unreadable or malformed input.
SampledPath read_path_csv(const std::string& file, std::optional<double> delta = std::nullopt);

/// Writes "time,value" rows, time = (i+1) delta.
void write_path_csv(const std::string& file, const SampledPath& path);

/// Writes "f,log_f,Y,count" rows.
void write_spectrum_csv(const std::string& file, const WaveletSpectrum& spec);

/// Fitted lines for plotting: "segment,role,log_f,Y,fitted" where role is
/// "regression" (indices used by the change-point criterion) or "refine".
void write_overlay_csv(const std::string& file, const WaveletSpectrum& spec, const FitResult& fit);

void write_text(const std::string& file, const std::string& text);

std::string format_number(double x);

Json to_json(const ModelSpec& model);
Json to_json(const FrequencyGrid& grid);
Json to_json(const SegmentEstimate& s);
Json to_json(const FitResult& fit);
Json to_json(const CellSummary& cell);

/// Raw per-replication rows: cell, replication, stream, K, ok, T, dof,
/// p_value, accepted, H..., omega..., error.
void write_montecarlo_csv(const std::string& file, const McRun& run);

}  // namespace mfbm
