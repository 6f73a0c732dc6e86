#pragma once

#include "otalign/adjoint.hpp"
#include "otalign/types.hpp"
#include "otalign/utility.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace otalign::strategies {

enum class StrategyKind {
  Impact,          // gradient-propagated query impact through the OT solve
  Random,
  Entropy,         // Shannon entropy of the plan row
  Margin,          // top-1 minus top-2 plan entry, negated
  LeastConfident,  // max plan entry, negated
  Density,         // representativeness among plan rows
  Diversity,       // KL divergence from labeled rows
  Betweenness,     // betweenness centrality on the source graph
};

enum class ImpactAggregation { Posterior, Uniform };

struct StrategySpec {
  StrategyKind kind = StrategyKind::Random;
  std::string name = "random";  // config identifier, used in logs and filenames

  // Impact only.
  utility::UtilitySpec utility;
  ImpactAggregation aggregation = ImpactAggregation::Posterior;
  bool absolute_value = false;

  int density_k = 20;

  bool requires_graph() const { return kind == StrategyKind::Betweenness; }
};

// Inputs a scoring pass may need beyond the plan itself. Diagnostics of the
// adjoint solve (for the session log) are written back into cg_iterations.
struct ScoreContext {
  const AlignmentProblem* problem = nullptr;
  const std::set<int>* labeled = nullptr;             // sources with supervision
  const SparseMatrix* source_adjacency = nullptr;     // Betweenness only
  std::uint64_t seed = 0;                             // Random only
  double cg_tolerance = 1e-8;
  int cg_max_iterations = 0;
  int cg_iterations = 0;                              // out
  bool dense_adjoint = false;                         // ablation: skip the support
};

// Deterministic scores for every pool member; higher score = more preferred.
std::map<int, double> score_all(const StrategySpec& spec, const std::vector<int>& pool,
                                const Coupling& coupling, ScoreContext& context);

// The batch_size highest-scoring pool members in selection order, ties broken
// by lowest index; selected members are removed from pool. A pool smaller
// than batch_size selects everything and sets *exhausted.
std::vector<int> select_batch(const std::map<int, double>& scores, std::vector<int>& pool,
                              int batch_size, bool* exhausted = nullptr);

// Exact betweenness centrality (Brandes) on an undirected graph, edges
// treated as unweighted.
Vector betweenness_centrality(const SparseMatrix& adjacency);

}  // namespace otalign::strategies
