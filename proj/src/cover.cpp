#include "carathedyn/cover.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>

namespace cdyn {

double CoverElement::xi() const { return std::exp(log_phi); }
double CoverElement::eta() const { return std::exp(-order); }
double CoverElement::psi() const { return std::exp(-order); }
double CoverElement::weight_at(double alpha) const {
  return std::exp(log_phi - order * alpha);
}

// ------------------------------------------------------ LeafCoverEngine

LeafCoverEngine::LeafCoverEngine(const SuspensionSystem& sys, SymbolicPoint leaf,
                                 double alpha, double cutoff, int depth_cap,
                                 int position_offset)
    : sys_(sys), leaf_(std::move(leaf)), alpha_(alpha), cutoff_(cutoff),
      depth_cap_(depth_cap), pos_off_(position_offset), k_r_(sys.k_r()) {
  const auto& roof = sys_.roof();
  const auto& pot = sys_.potential();
  int min_lo = std::min(roof.window_lo(), pot.window_lo());
  int max_hi = std::max(roof.window_hi(), pot.window_hi());
  if (pos_off_ == 0 && max_hi > k_r_ + 1)
    throw std::invalid_argument("cover dp: k_r too small for forward window reach");
  if (pos_off_ == 1 && max_hi > k_r_)
    throw std::invalid_argument("cover dp: k_r too small for backward window reach");
  state_len_ = k_r_ + 1 - min_lo;
  fiber_off_ = (pos_off_ == 0 ? -1.0 : 1.0) * leaf_.fiber();
  cutoff_eff_ = cutoff_ - fiber_off_;
  memo_min_depth_ = std::max({k_r_ + 1, state_len_, std::max(pot.window_hi(), 0) + 1, 1});
  if (depth_cap_ < memo_min_depth_)
    throw std::invalid_argument("cover dp: depth_cap too small");
  pow_.assign(state_len_ + 1, 1);
  for (int i = 1; i <= state_len_; ++i) pow_[i] = pow_[i - 1] * sys_.sft().alphabet();
}

int LeafCoverEngine::coord(const std::vector<int>& word, int i) const {
  if (i >= 1) return word[i - 1];
  return leaf_.at(i);
}

namespace {
double window_value(const LocallyConstantFunction& f,
                    const std::function<int(int)>& read, int pos) {
  int buf[16];
  int span = f.span();
  for (int k = 0; k < span; ++k) buf[k] = read(pos + f.window_lo() + k);
  return f.value_word(std::span<const int>(buf, static_cast<size_t>(span)));
}
}  // namespace

double LeafCoverEngine::added_roof(const std::vector<int>& word, int child_depth) const {
  int pos = pos_off_ + (child_depth - k_r_) - 1;
  auto read = [&](int i) { return coord(word, i); };
  return window_value(sys_.roof(), read, pos);
}

double LeafCoverEngine::added_g(const std::vector<int>& word, int child_depth) const {
  int pos = pos_off_ + (child_depth - k_r_) - 1;
  auto read = [&](int i) { return coord(word, i); };
  double rho = window_value(sys_.roof(), read, pos);
  double phi = window_value(sys_.potential(), read, pos);
  return (phi - alpha_) * rho;
}

double LeafCoverEngine::anchor_scalar(const std::vector<int>& word) const {
  if (fiber_off_ == 0.0) return 0.0;
  auto read = [&](int i) { return coord(word, i); };
  double phi0 = window_value(sys_.potential(), read, 0);
  return fiber_off_ * (phi0 - alpha_);
}

int LeafCoverEngine::state_code(const std::vector<int>& word, int depth) const {
  int code = 0;
  for (int i = depth - state_len_ + 1; i <= depth; ++i)
    code = code * sys_.sft().alphabet() + coord(word, i);
  return code;
}

LeafCoverEngine::NodeOut LeafCoverEngine::rec(int depth, std::vector<int>& word,
                                              double logw, double roofsum,
                                              std::vector<CoverElement>* out) {
  // target classification: a node is relevant if it meets some target and
  // fully inside once every compatible target's block is pinned
  bool relevant = targets_.empty();
  bool inside = targets_.empty();
  uint64_t mask = 0;
  if (!targets_.empty()) {
    bool any = false;
    bool all_covered = true;
    for (size_t i = 0; i < targets_.size(); ++i) {
      const auto& t = targets_[i];
      bool ok = true;
      int lo = std::max(t.start, 1), hi = std::min(t.end(), depth);
      for (int c = lo; c <= hi; ++c)
        if (word[c - 1] != t.word[c - t.start]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      any = true;
      if (t.end() > depth) {
        all_covered = false;
        if (i < 64) mask |= uint64_t{1} << i;
      }
    }
    relevant = any;
    inside = any && all_covered;
  }
  if (!relevant) return {0.0, 0.0};

  bool can_take = depth >= k_r_ && roofsum >= cutoff_eff_ &&
                  depth >= std::max(sys_.potential().window_hi(), 0);
  double weight = can_take ? std::exp(logw + anchor_scalar(word))
                           : std::numeric_limits<double>::infinity();

  if (depth == depth_cap_) {
    if (!can_take)
      throw std::invalid_argument("cover dp: depth_cap too small for cutoff");
    if (out)
      out->push_back({1, word, roofsum + fiber_off_,
                      logw + anchor_scalar(word) + alpha_ * (roofsum + fiber_off_)});
    return {weight, 1.0};
  }

  bool memoizable = !out && depth >= memo_min_depth_ && targets_.size() <= 64;
  Key key{};
  if (memoizable) {
    key.depth = depth;
    key.state = state_code(word, depth);
    key.mask = inside ? ~uint64_t{0} : mask;
    double residual = std::max(0.0, cutoff_eff_ - roofsum);
    if (residual > 0.0) {
      uint64_t bits;
      std::memcpy(&bits, &residual, sizeof(bits));
      key.residual_bits = bits;
    }
    auto& map = inside ? memo_ : memo_partial_;
    auto it = map.find(key);
    if (it != map.end()) {
      double v = std::exp(logw + anchor_scalar(word)) * it->second.value;
      return {v > kValueInfinity ? std::numeric_limits<double>::infinity() : v,
              it->second.count};
    }
  }

  double childsum = 0.0, childcount = 0.0;
  size_t mark = out ? out->size() : 0;
  for (int s = 0; s < sys_.sft().alphabet(); ++s) {
    if (!sys_.sft().allowed(coord(word, depth), s)) continue;
    word.push_back(s);
    double al = 0.0, ar = 0.0;
    if (depth + 1 > k_r_) {
      ar = added_roof(word, depth + 1);
      al = added_g(word, depth + 1);
    }
    NodeOut child = rec(depth + 1, word, logw + al, roofsum + ar, out);
    word.pop_back();
    childsum += child.value;
    childcount += child.count;
    if (childsum > kValueInfinity) childsum = std::numeric_limits<double>::infinity();
  }

  NodeOut result;
  if (can_take && weight < childsum) {
    if (out) {
      out->resize(mark);
      out->push_back({1, word, roofsum + fiber_off_,
                      logw + anchor_scalar(word) + alpha_ * (roofsum + fiber_off_)});
    }
    result = {weight, 1.0};
  } else {
    result = {childsum, childcount};
  }
  if (memoizable) {
    auto& map = key.mask == ~uint64_t{0} ? memo_ : memo_partial_;
    map.emplace(key, NodeOut{result.value / std::exp(logw + anchor_scalar(word)),
                             result.count});
  }
  return result;
}

CoverDpResult LeafCoverEngine::value_blocks(const std::vector<LeafTarget>& targets,
                                            bool record_cover) {
  for (const auto& t : targets) {
    if (t.start < 1)
      throw std::invalid_argument("cover dp: target blocks start at coordinate >= 1");
    if (!t.word.empty() && t.end() > depth_cap_)
      throw std::invalid_argument("cover dp: target deeper than depth_cap");
  }
  // partial-mask memo entries are target-specific
  std::vector<LeafTarget> live;
  for (const auto& t : targets)
    if (!t.word.empty()) live.push_back(t);
  bool whole = targets.empty() || live.size() != targets.size();
  targets_ = whole ? std::vector<LeafTarget>{} : std::move(live);
  // fully-inside entries are target-independent and stay cached
  memo_partial_.clear();

  CoverDpResult res;
  res.cutoff_T = cutoff_;
  res.depth_cap = depth_cap_;
  std::vector<int> word;
  word.reserve(depth_cap_ + 1);
  NodeOut root = rec(0, word, 0.0, 0.0, record_cover ? &res.optimal_cover : nullptr);
  res.value = root.value > kValueInfinity ? std::numeric_limits<double>::infinity()
                                          : root.value;
  res.cover_size = root.count;
  return res;
}

CoverDpResult LeafCoverEngine::value(const std::vector<std::vector<int>>& target_words,
                                     bool record_cover) {
  std::vector<LeafTarget> targets;
  for (const auto& w : target_words) targets.push_back({1, w});
  return value_blocks(targets, record_cover);
}

CoverDpResult cover_value(const SuspensionSystem& sys, const SymbolicPoint& leaf,
                          const std::vector<std::vector<int>>& target_words,
                          double alpha, double cutoff_T, int depth_cap,
                          bool record_cover) {
  LeafCoverEngine engine(sys, leaf, alpha, cutoff_T, depth_cap, 0);
  return engine.value(target_words, record_cover);
}

// ------------------------------------------------------ extrapolation

ExtrapolationResult extrapolate_limit(const std::vector<std::pair<double, double>>& values) {
  if (values.size() < 3)
    throw std::invalid_argument("extrapolate_limit: need at least 3 entries");
  ExtrapolationResult out;
  out.raw_tail = values.back().second;
  bool plateau = true;
  for (size_t i = 1; i < values.size(); ++i) {
    double a = values[i - 1].second, b = values[i].second;
    double ratio = (a == b) ? 1.0 : (a == 0.0 ? std::numeric_limits<double>::infinity()
                                              : b / a);
    if (ratio > 2.0 || ratio < 0.5) out.oscillation_flagged = true;
    if (std::fabs(ratio - 1.0) > 1e-3) plateau = false;
  }
  size_t n = values.size();
  double a0 = values[n - 3].second, a1 = values[n - 2].second, a2 = values[n - 1].second;
  double d1 = a1 - a0, d2 = a2 - a1;
  double denom = d2 - d1;
  out.accelerated = (std::fabs(denom) < 1e-300) ? a2 : a2 - d2 * d2 / denom;
  if (out.oscillation_flagged || plateau)
    out.value = out.raw_tail;
  else
    out.value = out.accelerated;
  return out;
}

// ------------------------------------------------------ critical value

namespace {

double max_leaf_root_value(const SuspensionSystem& sys, double alpha, double cutoff,
                           int depth_cap) {
  double best = 0.0;
  for (int c = 0; c < sys.sft().alphabet(); ++c) {
    SymbolicPoint leaf = sys.make_point(0, {c}, 0.0);
    LeafCoverEngine engine(sys, leaf, alpha, cutoff, depth_cap, 0);
    best = std::max(best, engine.whole_leaf().value);
  }
  return best;
}

}  // namespace

CriticalValueEstimate critical_value(const SuspensionSystem& sys,
                                     const std::vector<double>& T_schedule,
                                     int depth_cap, double alpha_tol) {
  for (size_t i = 1; i < T_schedule.size(); ++i)
    if (T_schedule[i] <= T_schedule[i - 1])
      throw std::invalid_argument("critical_value: T_schedule must be increasing");

  CriticalValueEstimate est;
  est.tolerance = alpha_tol;
  double margin = std::max(std::fabs(sys.potential().min_value()),
                           std::fabs(sys.potential().max_value())) +
                  std::log(static_cast<double>(sys.sft().alphabet())) / sys.min_roof() +
                  1.0;
  for (double T : T_schedule) {
    double lo = -margin, hi = margin;
    double vlo = max_leaf_root_value(sys, lo, T, depth_cap);
    double vhi = max_leaf_root_value(sys, hi, T, depth_cap);
    if (!(vlo >= 1.0 && vhi <= 1.0))
      throw std::runtime_error("critical_value: bracket does not straddle the crossing");
    while (hi - lo > alpha_tol) {
      double mid = 0.5 * (lo + hi);
      double v = max_leaf_root_value(sys, mid, T, depth_cap);
      if (v > vlo * (1.0 + 1e-9) || v < vhi * (1.0 - 1e-9))
        throw std::runtime_error("critical_value: cover value not monotone in alpha");
      if (v >= 1.0) {
        lo = mid;
        vlo = v;
      } else {
        hi = mid;
        vhi = v;
      }
    }
    est.per_cutoff.push_back({T, 0.5 * (lo + hi)});
  }

  size_t n = est.per_cutoff.size();
  if (n >= 3) {
    double a0 = est.per_cutoff[n - 3].second, a1 = est.per_cutoff[n - 2].second,
           a2 = est.per_cutoff[n - 1].second;
    double d1 = a1 - a0, d2 = a2 - a1;
    // Accelerate only a contracting tail; otherwise report the last crossing.
    if (std::fabs(d2) < std::fabs(d1) && std::fabs(d2 - d1) > 1e-14)
      est.alpha_star = a2 - d2 * d2 / (d2 - d1);
    else
      est.alpha_star = a2;
  } else {
    est.alpha_star = est.per_cutoff.back().second;
  }
  return est;
}

// ------------------------------------------------------ leaf measures

namespace {

LeafMeasureEntry leaf_measure_impl(const SuspensionSystem& sys, double pressure,
                                   const SymbolicPoint& leaf,
                                   const std::vector<std::vector<int>>& targets,
                                   const std::vector<double>& cutoffs, int depth_cap,
                                   int pos_off) {
  if (cutoffs.size() < 3)
    throw std::invalid_argument("leaf_measure: need at least 3 cutoffs");
  LeafMeasureEntry entry;
  double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
  for (double T : cutoffs) {
    LeafCoverEngine engine(sys, leaf, pressure, T, depth_cap, pos_off);
    double v = engine.value(targets).value;
    entry.per_cutoff.push_back({T, v});
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (vmax > 10.0 * vmin) entry.unstable = true;
  entry.value = extrapolate_limit(entry.per_cutoff).value;
  return entry;
}

}  // namespace

LeafMeasureEntry leaf_measure_u(const SuspensionSystem& sys, double pressure,
                                const SymbolicPoint& leaf,
                                const std::vector<int>& target_word,
                                const std::vector<double>& cutoffs, int depth_cap) {
  std::vector<std::vector<int>> targets;
  if (!target_word.empty()) targets.push_back(target_word);
  return leaf_measure_impl(sys, pressure, leaf, targets, cutoffs, depth_cap, 0);
}

LeafMeasureEntry leaf_measure_s(const SuspensionSystem& sys, double pressure,
                                const SymbolicPoint& leaf,
                                const std::vector<int>& target_word,
                                const std::vector<double>& cutoffs, int depth_cap) {
  SuspensionSystem rev = sys.reversed();
  SymbolicPoint rleaf = reflect_point(leaf, depth_cap + 8);
  std::vector<std::vector<int>> targets;
  if (!target_word.empty()) {
    // backward word over [-d, -1] becomes the reversed forward word
    std::vector<int> fwd(target_word.rbegin(), target_word.rend());
    targets.push_back(std::move(fwd));
  }
  return leaf_measure_impl(rev, pressure, rleaf, targets, cutoffs, depth_cap, 1);
}

double leaf_value_u(const SuspensionSystem& sys, double pressure,
                    const SymbolicPoint& leaf,
                    const std::vector<std::vector<int>>& targets, double cutoff,
                    int depth_cap) {
  LeafCoverEngine engine(sys, leaf, pressure, cutoff, depth_cap, 0);
  return engine.value(targets).value;
}

double leaf_value_s(const SuspensionSystem& sys, double pressure,
                    const SymbolicPoint& leaf,
                    const std::vector<std::vector<int>>& backward_words, double cutoff,
                    int depth_cap) {
  SuspensionSystem rev = sys.reversed();
  SymbolicPoint rleaf = reflect_point(leaf, depth_cap + 8);
  std::vector<std::vector<int>> targets;
  for (const auto& w : backward_words)
    targets.emplace_back(w.rbegin(), w.rend());
  LeafCoverEngine engine(rev, rleaf, pressure, cutoff, depth_cap, 1);
  return engine.value(targets).value;
}

}  // namespace cdyn
