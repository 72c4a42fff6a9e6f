#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "eigenmatch/moments.hpp"
#include "eigenmatch/spectral.hpp"

namespace eigenmatch {

// Discrete alignment parameters: per-index sign and an eigenfunction
// permutation. perm[i] is the source index in the second shape feeding
// matched slot i.
struct MatchParams {
  std::vector<int> signs;  // entries in {+1, -1}
  std::vector<int> perm;   // bijection on {0..N-1}

  static MatchParams identity(int n);
  int size() const { return static_cast<int>(signs.size()); }
  bool operator==(const MatchParams&) const = default;
};

struct CostBreakdown {
  double c_mu = 0.0;
  double c_muS = 0.0;
  double c_xi = 0.0;
  double c_xiS = 0.0;
  double alpha = 0.0;
  double total = 0.0;  // c_mu + c_muS + alpha * (c_xi + c_xiS)
};

struct Candidate {
  MatchParams params;
  double cost_cs = 0.0;  // C + C^S at recording time
  double total = 0.0;    // full cost, filled by the final selection
};

struct MatchResult {
  MatchParams params;
  CostBreakdown cost;
  std::vector<Candidate> candidates;  // audit trail, sorted by total cost
  std::vector<int> undetermined;      // indices whose diagonal moment vanished
  std::vector<std::pair<int, int>> degeneracy_x;
  std::vector<std::pair<int, int>> degeneracy_y;
};

double cost_mu(const MomentSet& mx, const MomentSet& my, const MatchParams& p);
double cost_muS(const MomentSet& mx, const MomentSet& my, const MatchParams& p);
double cost_xi(const MomentSet& mx, const MomentSet& my, const MatchParams& p);
double cost_xiS(const MomentSet& mx, const MomentSet& my, const MatchParams& p);

// The value terms only, C + C^S; this is what steps 1-3 minimize.
double cost_cs(const MomentSet& mx, const MomentSet& my, const MatchParams& p);

CostBreakdown total_cost(const MomentSet& mx, const MomentSet& my,
                         const MatchParams& p, double alpha);

// Step 1: signs from the products of diagonal third moments, identity
// permutation. Indices whose diagonal moment vanishes on either shape get
// +1 and are reported through `undetermined`.
MatchParams init_signs(const MomentSet& mx, const MomentSet& my,
                       std::vector<int>* undetermined = nullptr);

// Step 2: first-improvement greedy descent on C + C^S over adjacent
// transposition pairs (second pair optional, disjoint) and consecutive
// triple cycles, each combined with every sign option on touched indices.
MatchParams search_permutations(const MomentSet& mx, const MomentSet& my,
                                MatchParams p);

struct SignSearchResult {
  MatchParams best;
  double best_cost = 0.0;
  std::vector<Candidate> candidates;  // K lowest-cost distinct sign patterns
};

// Step 3: exhaustive sign flips over all index subsets of size <= 4 with the
// permutation held fixed. Undetermined indices are enumerated first.
SignSearchResult search_signs(const MomentSet& mx, const MomentSet& my,
                              const MatchParams& p, int K,
                              const std::vector<int>& undetermined = {});

// Step 4: rank the candidate list by the full cost including the
// alpha-weighted gradient terms. Ties break toward fewer sign flips
// (fewer -1 entries), then lexicographically smaller signs (+1 < -1).
MatchResult final_select(const MomentSet& mx, const MomentSet& my,
                         std::vector<Candidate> candidates, double alpha);

struct MatchOptions {
  int K = 32;  // candidate list size carried into step 4
};

// Runs steps 1-4, looping 2-3 while the value cost decreases.
MatchResult match_moment_sets(const MomentSet& mx, const MomentSet& my,
                              const MatchOptions& opts = {});

// phi~_i = signs[i] * phi_{perm[i]} of the second shape's basis.
Eigen::MatrixXd apply_match(const SpectralBasis& basis_y, const MatchParams& p,
                            int N);

}  // namespace eigenmatch
