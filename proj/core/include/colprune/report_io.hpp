#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "colprune/pipeline.hpp"
#include "colprune/solver.hpp"

namespace colprune {

/// Bumped whenever a field of the report JSON changes meaning or disappears.
inline constexpr int kReportSchemaVersion = 1;

/// Library version string.
const char* version();

nlohmann::json to_json(const RegParams& p);
nlohmann::json to_json(const SospReport& s);
nlohmann::json to_json(const PipelineConfig& c);
/// Full report, including schema_version. Matrices are omitted; column norms
/// and indices are included.
nlohmann::json to_json(const PipelineReport& r);
nlohmann::json to_json(const InitStats& s);

/// iter,loss,grad_norm,op_norm,min_col_norm,max_col_norm,gram_error,perturbed
void write_gd_trace_csv(const std::vector<GdTraceRow>& trace, std::ostream& out);
/// iter,gram_error,loss
void write_fine_tune_csv(const FineTuneResult& ft, std::ostream& out);
/// t,signal_norm,noise_norm,gram_error,field_norm
void write_flow_csv(const FlowTrace& trace, std::ostream& out);
/// t followed by one column per coordinate (prefix + index), from the
/// per-snapshot signal or column-norm vectors.
void write_flow_coordinates_csv(const FlowTrace& trace, bool signal, std::ostream& out);

}  // namespace colprune
