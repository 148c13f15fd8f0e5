#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gepa/optimizer.hpp"

namespace gepa {

struct Trajectory {
  std::vector<int> iterations;  // strictly increasing
  std::vector<double> values;
  std::string label;
};

void validate(const Trajectory& trajectory);

struct EmbeddingTrace {
  std::vector<int> iterations;
  std::vector<std::vector<double>> vectors;             // uniform dimension
  std::vector<std::pair<double, double>> projection;    // filled by pca_project
};

void validate(const EmbeddingTrace& trace);

// Prompt length in Unicode code points per iteration: the seed at iteration 0,
// the child born at each later iteration. Failed iterations leave gaps.
Trajectory length_trajectory(const ParsedRunLog& log);

double final_to_seed_ratio(const Trajectory& trajectory);

std::size_t utf8_length(const std::string& text);

// The (iteration, prompt text) sequence an embedding trace is built from.
std::vector<std::pair<int, std::string>> prompt_sequence(const ParsedRunLog& log);

struct PcaResult {
  EmbeddingTrace trace;              // input trace with projection filled in
  std::vector<double> component1;    // unit length, first nonzero loading positive
  std::vector<double> component2;
  double variance1 = 0.0;            // explained variances, non-increasing
  double variance2 = 0.0;
  std::vector<double> mean;
};

// Top-2 principal directions by power iteration with deflation (direction
// tolerance 1e-9, at most 1000 iterations per component). Raises
// degenerate_variance naming the deficient component when rank < 2.
PcaResult pca_project(const EmbeddingTrace& trace);

struct DriftMetrics {
  std::vector<int> iterations;               // points that entered the metrics
  std::vector<double> distance_to_start;     // cosine distance to iteration 0
  std::vector<double> consecutive_distance;  // [i] = distance from point i-1 to i; [0] = 0
  double direction_consistency = 0.0;        // mean cosine of consecutive displacement pairs
  std::vector<int> excluded_iterations;      // zero-norm points, dropped with a warning
  std::vector<std::string> warnings;
};

DriftMetrics drift_metrics(const EmbeddingTrace& trace);

// Iteration with the largest consecutive cosine distance, provided it exceeds
// median + multiplier * MAD of all consecutive distances; earliest on ties.
std::optional<int> detect_jump(const EmbeddingTrace& trace, double mad_multiplier = 3.0);

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b);

// Writes "<stem>.csv" and "<stem>.svg" into out_dir; rendering is
// deterministic, so re-emitting over the same directory is byte-identical.
std::vector<std::string> emit_trajectory(const Trajectory& trajectory, const std::string& out_dir,
                                         const std::string& stem = "length_trajectory");
std::vector<std::string> emit_embedding(const EmbeddingTrace& projected_trace,
                                        const DriftMetrics& metrics, const std::string& out_dir,
                                        const std::string& stem = "embedding_drift");

}  // namespace gepa
