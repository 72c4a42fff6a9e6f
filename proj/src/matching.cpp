#include "eigenmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "eigenmatch/errors.hpp"

namespace eigenmatch {

namespace {

void check_compatible(const MomentSet& mx, const MomentSet& my,
                      const MatchParams& p) {
  if (mx.N != my.N || mx.P != my.P || mx.Q != my.Q)
    throw DimensionMismatchError("moment sets have different dimensions");
  if (p.size() != mx.N ||
      static_cast<int>(p.perm.size()) != mx.N)
    throw DimensionMismatchError("match parameters do not fit the moment sets");
  std::vector<bool> hit(p.perm.size(), false);
  for (size_t i = 0; i < p.perm.size(); ++i) {
    const int v = p.perm[i];
    if (v < 0 || v >= mx.N || hit[v])
      throw DimensionMismatchError("permutation is not a bijection");
    hit[v] = true;
    if (p.signs[i] != 1 && p.signs[i] != -1)
      throw DimensionMismatchError("signs must be +1 or -1");
  }
}

int count_flips(const std::vector<int>& signs) {
  int n = 0;
  for (int s : signs) n += (s < 0);
  return n;
}

// Candidate ordering: cost, then fewer -1 entries, then lexicographic with
// +1 before -1, then permutation. Total order keeps every run reproducible.
bool params_less(const MatchParams& a, const MatchParams& b) {
  const int fa = count_flips(a.signs), fb = count_flips(b.signs);
  if (fa != fb) return fa < fb;
  for (size_t i = 0; i < a.signs.size(); ++i)
    if (a.signs[i] != b.signs[i]) return a.signs[i] > b.signs[i];
  return a.perm < b.perm;
}

bool candidate_less(const Candidate& a, const Candidate& b, bool by_total) {
  const double ca = by_total ? a.total : a.cost_cs;
  const double cb = by_total ? b.total : b.cost_cs;
  if (ca != cb) return ca < cb;
  return params_less(a.params, b.params);
}

}  // namespace

MatchParams MatchParams::identity(int n) {
  MatchParams p;
  p.signs.assign(n, 1);
  p.perm.resize(n);
  std::iota(p.perm.begin(), p.perm.end(), 0);
  return p;
}

double cost_mu(const MomentSet& mx, const MomentSet& my, const MatchParams& p) {
  check_compatible(mx, my, p);
  const int n = mx.N;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double s = p.signs[i] * p.signs[j] * p.signs[k];
        const double d =
            mx.mu(i, j, k) - s * my.mu(p.perm[i], p.perm[j], p.perm[k]);
        sum += d * d;
      }
  return sum;
}

double cost_muS(const MomentSet& mx, const MomentSet& my, const MatchParams& p) {
  check_compatible(mx, my, p);
  double sum = 0.0;
  for (int i = 0; i < mx.N; ++i)
    for (int q = 0; q < mx.Q; ++q) {
      const double d = mx.muS(i, q) - p.signs[i] * my.muS(p.perm[i], q);
      sum += d * d;
    }
  return mx.N * sum;
}

double cost_xi(const MomentSet& mx, const MomentSet& my, const MatchParams& p) {
  check_compatible(mx, my, p);
  const int n = mx.N;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double s = p.signs[i] * p.signs[j] * p.signs[k];
        for (int w = 0; w < mx.P; ++w) {
          const double d = mx.xi(i, j, k, w) -
                           s * my.xi(p.perm[i], p.perm[j], p.perm[k], w);
          sum += d * d;
        }
      }
  return sum;
}

double cost_xiS(const MomentSet& mx, const MomentSet& my, const MatchParams& p) {
  check_compatible(mx, my, p);
  const int n = mx.N;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < mx.Q; ++q)
      for (int k = 0; k < n; ++k) {
        const double s = p.signs[i] * p.signs[k];
        for (int w = 0; w < mx.P; ++w) {
          const double d =
              mx.xiS(i, q, k, w) - s * my.xiS(p.perm[i], q, p.perm[k], w);
          sum += d * d;
        }
      }
  return sum;
}

double cost_cs(const MomentSet& mx, const MomentSet& my, const MatchParams& p) {
  return cost_mu(mx, my, p) + cost_muS(mx, my, p);
}

CostBreakdown total_cost(const MomentSet& mx, const MomentSet& my,
                         const MatchParams& p, double alpha) {
  if (alpha < 0.0) throw DegenerateStatisticsError("alpha must be non-negative");
  CostBreakdown c;
  c.c_mu = cost_mu(mx, my, p);
  c.c_muS = cost_muS(mx, my, p);
  c.c_xi = cost_xi(mx, my, p);
  c.c_xiS = cost_xiS(mx, my, p);
  c.alpha = alpha;
  c.total = c.c_mu + c.c_muS + alpha * (c.c_xi + c.c_xiS);
  return c;
}

MatchParams init_signs(const MomentSet& mx, const MomentSet& my,
                       std::vector<int>* undetermined) {
  if (mx.N != my.N)
    throw DimensionMismatchError("moment sets have different dimensions");
  const double tol_x = 1e-10 * std::sqrt(mx.mu.sum_squares());
  const double tol_y = 1e-10 * std::sqrt(my.mu.sum_squares());

  MatchParams p = MatchParams::identity(mx.N);
  if (undetermined) undetermined->clear();
  for (int i = 0; i < mx.N; ++i) {
    const double dx = mx.mu(i, i, i);
    const double dy = my.mu(i, i, i);
    if (std::abs(dx) < tol_x || std::abs(dy) < tol_y) {
      p.signs[i] = 1;
      if (undetermined) undetermined->push_back(i);
    } else {
      p.signs[i] = dx * dy >= 0.0 ? 1 : -1;
    }
  }
  return p;
}

namespace {

// Evaluates every sign option on `touched` positions of base and folds the
// minimizer into (best, best_cost).
void fold_sign_options(const MomentSet& mx, const MomentSet& my,
                       const MatchParams& base, const std::vector<int>& touched,
                       MatchParams& best, double& best_cost) {
  const int combos = 1 << touched.size();
  for (int mask = 0; mask < combos; ++mask) {
    MatchParams cand = base;
    for (size_t b = 0; b < touched.size(); ++b)
      if (mask & (1 << b)) cand.signs[touched[b]] = -cand.signs[touched[b]];
    const double c = cost_cs(mx, my, cand);
    if (c < best_cost) {
      best = std::move(cand);
      best_cost = c;
    }
  }
}

}  // namespace

MatchParams search_permutations(const MomentSet& mx, const MomentSet& my,
                                MatchParams p) {
  check_compatible(mx, my, p);
  const int n = mx.N;
  double cur = cost_cs(mx, my, p);

  // steepest descent: scan every profile move with every sign option on the
  // touched slots, take the best strict improvement, repeat to a local min
  while (true) {
    MatchParams best = p;
    double best_cost = cur;

    // (a) one adjacent transposition, optionally combined with a second
    // disjoint one
    for (int i = 0; i + 1 < n; ++i) {
      for (int k = i; k + 1 < n; k += (k == i ? 2 : 1)) {
        // k == i encodes "no second pair"
        MatchParams moved = p;
        std::swap(moved.perm[i], moved.perm[i + 1]);
        std::vector<int> touched = {i, i + 1};
        if (k > i) {
          std::swap(moved.perm[k], moved.perm[k + 1]);
          touched.push_back(k);
          touched.push_back(k + 1);
        }
        fold_sign_options(mx, my, moved, touched, best, best_cost);
      }
    }

    // (b) consecutive triple cycles, both directions
    for (int i = 0; i + 2 < n; ++i) {
      for (int dir = 0; dir < 2; ++dir) {
        MatchParams moved = p;
        if (dir == 0) {
          // left cycle: (a, b, c) -> (b, c, a)
          const int a = moved.perm[i];
          moved.perm[i] = moved.perm[i + 1];
          moved.perm[i + 1] = moved.perm[i + 2];
          moved.perm[i + 2] = a;
        } else {
          // right cycle: (a, b, c) -> (c, a, b)
          const int c = moved.perm[i + 2];
          moved.perm[i + 2] = moved.perm[i + 1];
          moved.perm[i + 1] = moved.perm[i];
          moved.perm[i] = c;
        }
        fold_sign_options(mx, my, moved, {i, i + 1, i + 2}, best, best_cost);
      }
    }

    if (best_cost >= cur) return p;
    p = std::move(best);
    cur = best_cost;
  }
}

SignSearchResult search_signs(const MomentSet& mx, const MomentSet& my,
                              const MatchParams& p, int K,
                              const std::vector<int>& undetermined) {
  check_compatible(mx, my, p);
  if (K < 1) throw DimensionMismatchError("candidate list size must be >= 1");
  const int n = mx.N;

  // Enumeration order: undetermined indices first, then the rest ascending.
  std::vector<int> order = undetermined;
  for (int i = 0; i < n; ++i)
    if (std::find(order.begin(), order.end(), i) == order.end())
      order.push_back(i);

  SignSearchResult out;
  out.best = p;
  out.best_cost = cost_cs(mx, my, p);
  std::vector<Candidate> seen;

  auto consider = [&](const std::vector<int>& flip_slots) {
    MatchParams cand = p;
    for (int s : flip_slots) cand.signs[s] = -cand.signs[s];
    const double c = cost_cs(mx, my, cand);
    if (c < out.best_cost ||
        (c == out.best_cost && params_less(cand, out.best))) {
      out.best = cand;
      out.best_cost = c;
    }
    seen.push_back(Candidate{std::move(cand), c, 0.0});
  };

  consider({});
  std::vector<int> slots;
  for (int m = 1; m <= std::min(4, n); ++m) {
    // lexicographic combinations over `order`
    std::vector<int> comb(m);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      slots.clear();
      for (int c : comb) slots.push_back(order[c]);
      consider(slots);
      int pos = m - 1;
      while (pos >= 0 && comb[pos] == n - m + pos) --pos;
      if (pos < 0) break;
      ++comb[pos];
      for (int t = pos + 1; t < m; ++t) comb[t] = comb[t - 1] + 1;
    }
  }

  std::sort(seen.begin(), seen.end(), [](const Candidate& a, const Candidate& b) {
    return candidate_less(a, b, false);
  });
  // distinct sign sequences only; the permutation is shared here
  for (const Candidate& c : seen) {
    if (static_cast<int>(out.candidates.size()) >= K) break;
    bool dup = false;
    for (const Candidate& kept : out.candidates)
      if (kept.params.signs == c.params.signs) {
        dup = true;
        break;
      }
    if (!dup) out.candidates.push_back(c);
  }
  return out;
}

MatchResult final_select(const MomentSet& mx, const MomentSet& my,
                         std::vector<Candidate> candidates, double alpha) {
  if (candidates.empty())
    throw EmptyCandidateError("no candidates to select from");

  for (Candidate& c : candidates)
    c.total = total_cost(mx, my, c.params, alpha).total;
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return candidate_less(a, b, true);
            });

  MatchResult result;
  result.params = candidates.front().params;
  result.cost = total_cost(mx, my, result.params, alpha);
  result.candidates = std::move(candidates);
  return result;
}

MatchResult match_moment_sets(const MomentSet& mx, const MomentSet& my,
                              const MatchOptions& opts) {
  std::vector<int> undetermined;
  MatchParams cur = init_signs(mx, my, &undetermined);

  // Candidates pooled across every step-3 pass, deduplicated by parameters.
  std::map<std::pair<std::vector<int>, std::vector<int>>, Candidate> pool;
  auto record = [&pool](const Candidate& c) {
    auto key = std::make_pair(c.params.signs, c.params.perm);
    auto it = pool.find(key);
    if (it == pool.end() || c.cost_cs < it->second.cost_cs) pool[key] = c;
  };
  record(Candidate{cur, cost_cs(mx, my, cur), 0.0});

  double cur_cost = cost_cs(mx, my, cur);
  while (true) {
    MatchParams stepped = search_permutations(mx, my, cur);
    SignSearchResult signs = search_signs(mx, my, stepped, opts.K, undetermined);
    for (const Candidate& c : signs.candidates) record(c);
    cur = signs.best;
    if (signs.best_cost < cur_cost) {
      cur_cost = signs.best_cost;
      continue;
    }
    cur_cost = signs.best_cost;
    break;
  }

  std::vector<Candidate> candidates;
  candidates.reserve(pool.size());
  for (auto& [key, c] : pool) candidates.push_back(c);
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return candidate_less(a, b, false);
            });
  if (static_cast<int>(candidates.size()) > opts.K) candidates.resize(opts.K);

  MatchResult result = final_select(mx, my, std::move(candidates), mx.alpha);
  result.undetermined = std::move(undetermined);
  return result;
}

Eigen::MatrixXd apply_match(const SpectralBasis& basis_y, const MatchParams& p,
                            int N) {
  if (N < 1 || N > basis_y.count())
    throw DimensionMismatchError("matched band exceeds basis size");
  if (p.size() < N || static_cast<int>(p.perm.size()) < N)
    throw DimensionMismatchError("match parameters shorter than matched band");
  Eigen::MatrixXd out(basis_y.vertex_count(), N);
  for (int i = 0; i < N; ++i) {
    const int src = p.perm[i];
    if (src < 0 || src >= basis_y.count())
      throw DimensionMismatchError("permutation entry outside basis");
    out.col(i) = static_cast<double>(p.signs[i]) * basis_y.eigenfunctions.col(src);
  }
  return out;
}

}  // namespace eigenmatch
