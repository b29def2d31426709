#ifndef DOMAINAUG_SELECTION_HPP
#define DOMAINAUG_SELECTION_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "domainaug/embedding.hpp"
#include "domainaug/types.hpp"

namespace domainaug {

enum class Metric { mmd, cosine };

const char* to_string(Metric m);

struct ScoredCandidate {
  std::string candidate_id;
  double distance = 0.0;
  int rank = 0;  // 1-based, ascending distance
  bool kept = false;
};

struct FilterConfig {
  double k = 0.8;
  Metric metric = Metric::mmd;
};

// Squared distance between the candidate and the mean of the target embeddings.
double mmd_sq(const EmbeddingVector& candidate, const std::vector<EmbeddingVector>& targets);
double mmd_sq(const EmbeddingVector& candidate, const std::vector<double>& target_mean);

// Sum over targets of (1 - cosine similarity). A zero-norm vector contributes a similarity
// of 0 (distance 1) and bumps the zero-norm counter.
double cosine_dist(const EmbeddingVector& candidate, const std::vector<EmbeddingVector>& targets,
                   Counters* counters = nullptr);

// Scores every candidate against the target set with the chosen metric. Parallel across
// candidates; the serial reference is kept for tests and the benchmark.
std::vector<double> score_candidates(const std::vector<EmbeddingVector>& candidates,
                                     const std::vector<EmbeddingVector>& targets, Metric metric,
                                     Counters* counters = nullptr);
std::vector<double> score_candidates_ref(const std::vector<EmbeddingVector>& candidates,
                                         const std::vector<EmbeddingVector>& targets, Metric metric,
                                         Counters* counters = nullptr);

// Number of candidates the shrinkage ratio keeps out of n_a.
int shrink_count(int n_a, double k);

// Keeps the floor(n_a * k) candidates with the smallest distances, ties broken by ascending
// candidate_id. Returns kept ids in ascending distance order.
std::vector<std::string> filter_top_k(const std::vector<ScoredCandidate>& scored, double k);

// Full ranking: every candidate with rank and kept flag assigned, sorted by rank.
std::vector<ScoredCandidate> rank_candidates(std::vector<ScoredCandidate> scored, double k);

// Score CSV: header `candidate_id,distance,rank,kept`, rows sorted by rank.
void save_score_csv(const std::filesystem::path& path, const std::vector<ScoredCandidate>& ranked);
std::vector<ScoredCandidate> load_score_csv(const std::filesystem::path& path);

}  // namespace domainaug

#endif
