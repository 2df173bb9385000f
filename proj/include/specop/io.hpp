// io.hpp — file formats: JSON objects for spectra, fields, symbols, systems,
// reports and solve outcomes, plus the fixed-column CSV exports.

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

// vendored nlohmann/json single header
#include "json.hpp"

#include "specop/diagnostics.hpp"
#include "specop/solvers.hpp"
#include "specop/witnesses.hpp"

namespace specop::io {

using json = nlohmann::json;

// ---- JSON object builders ----------------------------------------------------

json spectrum_to_json(const SpectrumModel& s);
std::shared_ptr<const SpectrumModel> spectrum_from_json(const json& j);

json field_to_json(const CoefficientField& u);
CoefficientField field_from_json(const json& j, std::shared_ptr<const SpectrumModel> spectrum);

json symbol_to_json(const InvariantSymbol& p);
InvariantSymbol symbol_from_json(const json& j, std::shared_ptr<const SpectrumModel> spectrum);

// {"operators": [ <symbol object> | {"file": "path"} , ... ]}
json system_to_json(const SystemSymbol& s);
SystemSymbol system_from_json(const json& j, std::shared_ptr<const SpectrumModel> spectrum,
                              const std::filesystem::path& base_dir = {});

json report_to_json(const DiagnosticReport& r);
json outcome_to_json(const SolveOutcome& o, const RunConfig& cfg);
json witness_log_to_json(const WitnessBundle& w, const RunConfig& cfg);
json decay_to_json(const DecayReport& d);

// ---- files -------------------------------------------------------------------

json load_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

void write_field_csv(const std::filesystem::path& path, const CoefficientField& u);
// Fixed plotting contract: k,lambda,gain,kernel_dim
void write_curve_csv(const std::filesystem::path& path, const GainCurve& curve);
void write_residual_csv(const std::filesystem::path& path, const SpectrumModel& s,
                        const std::vector<double>& residuals);

}  // namespace specop::io
