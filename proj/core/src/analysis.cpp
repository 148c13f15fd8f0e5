#include "gepa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gepa/error.hpp"
#include "svg.hpp"

namespace gepa {

void validate(const Trajectory& trajectory) {
  if (trajectory.iterations.size() != trajectory.values.size())
    raise(ErrorKind::invalid_argument, "trajectory iterations/values length mismatch");
  for (std::size_t i = 1; i < trajectory.iterations.size(); ++i) {
    if (trajectory.iterations[i] <= trajectory.iterations[i - 1])
      raise(ErrorKind::invalid_argument, "trajectory iterations must be strictly increasing");
  }
}

void validate(const EmbeddingTrace& trace) {
  if (trace.iterations.size() != trace.vectors.size())
    raise(ErrorKind::invalid_argument, "trace iterations/vectors length mismatch");
  for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
    if (trace.iterations[i] <= trace.iterations[i - 1])
      raise(ErrorKind::invalid_argument, "trace iterations must be strictly increasing");
  }
  for (const auto& v : trace.vectors) {
    if (!trace.vectors.empty() && v.size() != trace.vectors.front().size())
      raise(ErrorKind::invalid_argument, "trace vectors must share one dimension");
  }
  if (!trace.projection.empty() && trace.projection.size() != trace.vectors.size())
    raise(ErrorKind::invalid_argument, "trace projection length mismatch");
}

std::size_t utf8_length(const std::string& text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;  // count sequence-leading bytes
  }
  return n;
}

std::vector<std::pair<int, std::string>> prompt_sequence(const ParsedRunLog& log) {
  if (!log.header) raise(ErrorKind::format, "run log has no header");
  std::vector<std::pair<int, std::string>> sequence;
  sequence.emplace_back(0, log.header->seed_prompt.text);
  for (const RunRecord& record : log.records) {
    if (const auto* step = std::get_if<StepRecord>(&record))
      sequence.emplace_back(step->iteration, step->child.text);
  }
  return sequence;
}

Trajectory length_trajectory(const ParsedRunLog& log) {
  Trajectory trajectory;
  trajectory.label = "prompt length (characters)";
  for (const auto& [iteration, text] : prompt_sequence(log)) {
    trajectory.iterations.push_back(iteration);
    trajectory.values.push_back(static_cast<double>(utf8_length(text)));
  }
  validate(trajectory);
  return trajectory;
}

double final_to_seed_ratio(const Trajectory& trajectory) {
  validate(trajectory);
  if (trajectory.values.empty()) raise(ErrorKind::invalid_argument, "empty trajectory");
  if (trajectory.values.front() == 0.0) raise(ErrorKind::invalid_argument, "seed length is zero");
  return trajectory.values.back() / trajectory.values.front();
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

void scale(std::vector<double>& v, double factor) {
  for (double& x : v) x *= factor;
}

// Deterministic start direction; any fixed nonzero vector works for a PSD
// operator, a seeded pseudo-random one avoids pathological alignments.
std::vector<double> start_vector(std::size_t dim, std::uint64_t salt) {
  std::vector<double> v(dim);
  std::uint64_t h = 0x9e3779b97f4a7c15ull + salt;
  for (double& x : v) {
    h ^= h >> 12;
    h ^= h << 25;
    h ^= h >> 27;
    x = static_cast<double>((h * 0x2545f4914f6cdd1dull) >> 11) / static_cast<double>(1ull << 53) - 0.5;
  }
  const double n = norm(v);
  scale(v, 1.0 / n);
  return v;
}

}  // namespace

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0)
    raise(ErrorKind::invalid_argument, "cosine distance of a zero-norm vector");
  return 1.0 - dot(a, b) / (na * nb);
}

PcaResult pca_project(const EmbeddingTrace& trace) {
  validate(trace);
  const std::size_t n = trace.vectors.size();
  if (n < 3) raise(ErrorKind::invalid_argument, "pca_project needs at least 3 vectors");
  const std::size_t dim = trace.vectors.front().size();
  if (dim < 2) raise(ErrorKind::invalid_argument, "pca_project needs dimension >= 2");

  std::vector<double> mean(dim, 0.0);
  for (const auto& v : trace.vectors)
    for (std::size_t j = 0; j < dim; ++j) mean[j] += v[j];
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<std::vector<double>> centered(n, std::vector<double>(dim));
  double total_variance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) centered[i][j] = trace.vectors[i][j] - mean[j];
    total_variance += dot(centered[i], centered[i]);
  }
  total_variance /= static_cast<double>(n - 1);
  if (total_variance <= 1e-18)
    raise(ErrorKind::degenerate_variance,
          "principal component 1 has degenerate variance (all vectors identical after centering)");

  // Matrix-free covariance application: C v = Xᵀ(X v) / (n-1).
  auto apply_cov = [&](const std::vector<double>& v) {
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double coeff = dot(centered[i], v);
      for (std::size_t j = 0; j < dim; ++j) out[j] += coeff * centered[i][j];
    }
    scale(out, 1.0 / static_cast<double>(n - 1));
    return out;
  };

  constexpr double kTolerance = 1e-9;
  constexpr int kMaxIterations = 1000;

  struct Component {
    std::vector<double> direction;
    double variance = 0.0;
  };

  auto power_iterate = [&](auto&& apply, std::uint64_t salt) {
    Component c;
    std::vector<double> v = start_vector(dim, salt);
    for (int it = 0; it < kMaxIterations; ++it) {
      std::vector<double> w = apply(v);
      const double wn = norm(w);
      if (wn <= 1e-300) {  // operator annihilated the iterate: zero variance left
        c.direction = v;
        c.variance = 0.0;
        return c;
      }
      scale(w, 1.0 / wn);
      double delta = 0.0;
      for (std::size_t j = 0; j < dim; ++j) delta += (w[j] - v[j]) * (w[j] - v[j]);
      v = std::move(w);
      if (std::sqrt(delta) < kTolerance) break;
    }
    c.variance = dot(v, apply(v));  // Rayleigh quotient
    c.direction = std::move(v);
    return c;
  };

  Component first = power_iterate(apply_cov, 1);

  auto apply_deflated = [&](const std::vector<double>& v) {
    std::vector<double> out = apply_cov(v);
    const double along = dot(first.direction, v) * first.variance;
    for (std::size_t j = 0; j < dim; ++j) out[j] -= along * first.direction[j];
    return out;
  };
  Component second = power_iterate(apply_deflated, 2);

  if (second.variance <= 1e-12 * std::max(first.variance, 1e-300))
    raise(ErrorKind::degenerate_variance,
          "principal component 2 has degenerate variance (rank < 2 after centering)");

  // Deflation leaves a tolerance-level residual along the first direction.
  const double overlap = dot(second.direction, first.direction);
  for (std::size_t j = 0; j < dim; ++j) second.direction[j] -= overlap * first.direction[j];
  scale(second.direction, 1.0 / norm(second.direction));

  if (second.variance > first.variance) std::swap(first, second);

  auto fix_sign = [](std::vector<double>& v) {
    for (double x : v) {
      if (std::abs(x) > 1e-12) {
        if (x < 0) {
          for (double& y : v) y = -y;
        }
        return;
      }
    }
  };
  fix_sign(first.direction);
  fix_sign(second.direction);

  PcaResult result;
  result.trace = trace;
  result.trace.projection.clear();
  result.trace.projection.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    result.trace.projection.emplace_back(dot(centered[i], first.direction),
                                         dot(centered[i], second.direction));
  result.component1 = std::move(first.direction);
  result.component2 = std::move(second.direction);
  result.variance1 = first.variance;
  result.variance2 = second.variance;
  result.mean = std::move(mean);
  return result;
}

DriftMetrics drift_metrics(const EmbeddingTrace& trace) {
  validate(trace);
  if (trace.vectors.size() < 2) raise(ErrorKind::invalid_argument, "drift_metrics needs >= 2 vectors");

  DriftMetrics metrics;
  std::vector<const std::vector<double>*> points;
  for (std::size_t i = 0; i < trace.vectors.size(); ++i) {
    if (norm(trace.vectors[i]) == 0.0) {
      metrics.excluded_iterations.push_back(trace.iterations[i]);
      metrics.warnings.push_back("iteration " + std::to_string(trace.iterations[i]) +
                                 ": zero-norm vector excluded");
      continue;
    }
    metrics.iterations.push_back(trace.iterations[i]);
    points.push_back(&trace.vectors[i]);
  }
  if (points.size() < 2)
    raise(ErrorKind::invalid_argument, "drift_metrics has fewer than 2 usable vectors");

  const std::vector<double>& origin = *points.front();
  for (std::size_t i = 0; i < points.size(); ++i) {
    metrics.distance_to_start.push_back(i == 0 ? 0.0 : cosine_distance(origin, *points[i]));
    metrics.consecutive_distance.push_back(i == 0 ? 0.0 : cosine_distance(*points[i - 1], *points[i]));
  }

  // Mean cosine similarity of consecutive displacement pairs (d_t, d_{t+1}).
  std::vector<std::vector<double>> displacements;
  for (std::size_t i = 1; i < points.size(); ++i) {
    std::vector<double> d(points[i]->size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = (*points[i])[j] - (*points[i - 1])[j];
    displacements.push_back(std::move(d));
  }
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < displacements.size(); ++i) {
    const double na = norm(displacements[i]);
    const double nb = norm(displacements[i + 1]);
    if (na == 0.0 || nb == 0.0) {
      metrics.warnings.push_back("zero-norm displacement skipped in direction consistency");
      continue;
    }
    sum += dot(displacements[i], displacements[i + 1]) / (na * nb);
    ++pairs;
  }
  metrics.direction_consistency = pairs > 0 ? sum / pairs : 0.0;
  return metrics;
}

std::optional<int> detect_jump(const EmbeddingTrace& trace, double mad_multiplier) {
  validate(trace);
  if (trace.vectors.size() < 5) raise(ErrorKind::invalid_argument, "detect_jump needs >= 5 vectors");

  const DriftMetrics metrics = drift_metrics(trace);
  std::vector<double> steps(metrics.consecutive_distance.begin() + 1,
                            metrics.consecutive_distance.end());
  if (steps.empty()) return std::nullopt;

  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };
  const double median = median_of(steps);
  std::vector<double> deviations;
  deviations.reserve(steps.size());
  for (double s : steps) deviations.push_back(std::abs(s - median));
  const double mad = median_of(deviations);
  const double threshold = median + mad_multiplier * mad;

  std::size_t best = 0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] > steps[best]) best = i;  // strict: earliest of equal maxima
  }
  if (steps[best] > threshold) return metrics.iterations[best + 1];
  return std::nullopt;
}

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot write '" + path + "'");
  out << content;
}

}  // namespace

std::vector<std::string> emit_trajectory(const Trajectory& trajectory, const std::string& out_dir,
                                         const std::string& stem) {
  validate(trajectory);
  std::filesystem::create_directories(out_dir);

  std::string csv = "iteration,value\n";
  for (std::size_t i = 0; i < trajectory.iterations.size(); ++i)
    csv += std::to_string(trajectory.iterations[i]) + "," + format_value(trajectory.values[i]) + "\n";
  const std::string csv_path = out_dir + "/" + stem + ".csv";
  write_file(csv_path, csv);

  std::vector<double> xs(trajectory.iterations.begin(), trajectory.iterations.end());
  const std::string svg_path = out_dir + "/" + stem + ".svg";
  write_file(svg_path, svg_line_plot(xs, trajectory.values, "iteration", trajectory.label));
  return {csv_path, svg_path};
}

std::vector<std::string> emit_embedding(const EmbeddingTrace& projected_trace,
                                        const DriftMetrics& metrics, const std::string& out_dir,
                                        const std::string& stem) {
  validate(projected_trace);
  if (projected_trace.projection.empty())
    raise(ErrorKind::invalid_argument, "emit_embedding needs a projected trace (run pca_project)");
  std::filesystem::create_directories(out_dir);

  // Drift metrics may exclude zero-norm points; join on iteration.
  std::string csv = "iteration,pc1,pc2,distance_to_start,consecutive_distance\n";
  for (std::size_t i = 0; i < projected_trace.iterations.size(); ++i) {
    const int iteration = projected_trace.iterations[i];
    csv += std::to_string(iteration) + "," + format_value(projected_trace.projection[i].first) + "," +
           format_value(projected_trace.projection[i].second);
    const auto it = std::find(metrics.iterations.begin(), metrics.iterations.end(), iteration);
    if (it != metrics.iterations.end()) {
      const std::size_t k = static_cast<std::size_t>(it - metrics.iterations.begin());
      csv += "," + format_value(metrics.distance_to_start[k]) + "," +
             format_value(metrics.consecutive_distance[k]);
    } else {
      csv += ",,";
    }
    csv += "\n";
  }
  const std::string csv_path = out_dir + "/" + stem + ".csv";
  write_file(csv_path, csv);

  std::vector<double> xs, ys;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < projected_trace.projection.size(); ++i) {
    xs.push_back(projected_trace.projection[i].first);
    ys.push_back(projected_trace.projection[i].second);
    labels.push_back(std::to_string(projected_trace.iterations[i]));
  }
  const std::string svg_path = out_dir + "/" + stem + ".svg";
  write_file(svg_path, svg_scatter_path_plot(xs, ys, labels, "pc1", "pc2"));
  return {csv_path, svg_path};
}

}  // namespace gepa
