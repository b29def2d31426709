#include "domainaug/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "domainaug/errors.hpp"

namespace domainaug {

namespace {

void check_dims(const EmbeddingVector& a, int dim, const char* what) {
  if (a.dimension() != dim)
    throw std::invalid_argument(std::string(what) + " dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                                std::to_string(dim));
}

std::vector<double> target_mean(const std::vector<EmbeddingVector>& targets) {
  if (targets.empty()) throw std::invalid_argument("target set is empty");
  const int dim = targets.front().dimension();
  std::vector<double> mean(dim, 0.0);
  for (const EmbeddingVector& t : targets) {
    check_dims(t, dim, "target");
    for (int i = 0; i < dim; ++i) mean[i] += t.values[i];
  }
  for (double& v : mean) v /= static_cast<double>(targets.size());
  return mean;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

const char* to_string(Metric m) { return m == Metric::mmd ? "mmd" : "cosine"; }

double mmd_sq(const EmbeddingVector& candidate, const std::vector<double>& mean) {
  check_dims(candidate, static_cast<int>(mean.size()), "candidate");
  double s = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double d = mean[i] - candidate.values[i];
    s += d * d;
  }
  return s;
}

double mmd_sq(const EmbeddingVector& candidate, const std::vector<EmbeddingVector>& targets) {
  return mmd_sq(candidate, target_mean(targets));
}

double cosine_dist(const EmbeddingVector& candidate, const std::vector<EmbeddingVector>& targets, Counters* counters) {
  if (targets.empty()) throw std::invalid_argument("target set is empty");
  const int dim = candidate.dimension();
  const double cn = norm2(candidate.values);
  double total = 0.0;
  for (const EmbeddingVector& t : targets) {
    check_dims(t, dim, "target");
    const double tn = norm2(t.values);
    double cos_sim = 0.0;
    if (cn == 0.0 || tn == 0.0) {
      if (counters) ++counters->zero_norm_embeddings;
    } else {
      double dot = 0.0;
      for (int i = 0; i < dim; ++i) dot += candidate.values[i] * t.values[i];
      cos_sim = dot / (cn * tn);
    }
    total += 1.0 - cos_sim;
  }
  return total;
}

std::vector<double> score_candidates(const std::vector<EmbeddingVector>& candidates,
                                     const std::vector<EmbeddingVector>& targets, Metric metric, Counters* counters) {
  std::vector<double> out(candidates.size());
  if (metric == Metric::mmd) {
    const std::vector<double> mean = target_mean(targets);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) out[i] = mmd_sq(candidates[i], mean);
  } else {
    std::vector<Counters> local(candidates.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i)
      out[i] = cosine_dist(candidates[i], targets, &local[i]);
    if (counters)
      for (const Counters& c : local) *counters += c;
  }
  return out;
}

std::vector<double> score_candidates_ref(const std::vector<EmbeddingVector>& candidates,
                                         const std::vector<EmbeddingVector>& targets, Metric metric,
                                         Counters* counters) {
  std::vector<double> out(candidates.size());
  if (metric == Metric::mmd) {
    const std::vector<double> mean = target_mean(targets);
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = mmd_sq(candidates[i], mean);
  } else {
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = cosine_dist(candidates[i], targets, counters);
  }
  return out;
}

int shrink_count(int n_a, double k) {
  if (!(k > 0.0 && k <= 1.0)) throw ConfigError("shrinkage ratio k must be in (0,1], got " + std::to_string(k));
  // Nudge past representation error so an exact decimal product floors to the intended integer.
  return static_cast<int>(std::floor(static_cast<double>(n_a) * k + 1e-9));
}

std::vector<ScoredCandidate> rank_candidates(std::vector<ScoredCandidate> scored, double k) {
  if (scored.empty()) throw std::invalid_argument("no candidates to rank");
  const int n_b = shrink_count(static_cast<int>(scored.size()), k);
  if (n_b == 0) throw ConfigError("shrinkage ratio eliminates all candidates (floor(" +
                                  std::to_string(scored.size()) + " * " + std::to_string(k) + ") = 0)");
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.candidate_id < b.candidate_id;
  });
  for (int i = 0; i < static_cast<int>(scored.size()); ++i) {
    scored[i].rank = i + 1;
    scored[i].kept = i < n_b;
  }
  return scored;
}

std::vector<std::string> filter_top_k(const std::vector<ScoredCandidate>& scored, double k) {
  const std::vector<ScoredCandidate> ranked = rank_candidates(scored, k);
  std::vector<std::string> kept;
  for (const ScoredCandidate& c : ranked) {
    if (!c.kept) break;
    kept.push_back(c.candidate_id);
  }
  return kept;
}

void save_score_csv(const std::filesystem::path& path, const std::vector<ScoredCandidate>& ranked) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write score CSV " + path.string());
  out << "candidate_id,distance,rank,kept\n";
  for (const ScoredCandidate& c : ranked)
    out << c.candidate_id << ',' << format_double(c.distance) << ',' << c.rank << ',' << (c.kept ? 1 : 0) << "\n";
}

std::vector<ScoredCandidate> load_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score CSV " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("score CSV " + path.string() + " is empty");
  std::vector<ScoredCandidate> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    ScoredCandidate c;
    std::size_t p0 = line.find(',');
    if (p0 == std::string::npos) throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad row");
    c.candidate_id = line.substr(0, p0);
    const char* p = line.data() + p0 + 1;
    const char* end = line.data() + line.size();
    auto [np, ec] = std::from_chars(p, end, c.distance);
    if (ec != std::errc())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad distance");
    if (np < end && *np == ',') {
      ++np;
      int rank = 0, kept = 0;
      auto [np2, ec2] = std::from_chars(np, end, rank);
      if (ec2 == std::errc() && np2 < end && *np2 == ',') std::from_chars(np2 + 1, end, kept);
      c.rank = rank;
      c.kept = kept != 0;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace domainaug
