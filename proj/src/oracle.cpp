#include "carathedyn/oracle.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cdyn {

LocallyConstantFunction lcf_combine(
    const Sft& sft, const LocallyConstantFunction& f,
    const LocallyConstantFunction& g,
    const std::function<double(double, double)>& op) {
  int n = sft.alphabet();
  int lo = std::min(f.window_lo(), g.window_lo());
  int hi = std::max(f.window_hi(), g.window_hi());
  int span = hi - lo + 1;
  size_t total = 1;
  for (int i = 0; i < span; ++i) total *= n;
  std::vector<double> vals(total);
  std::vector<int> word(span);
  for (size_t idx = 0; idx < total; ++idx) {
    size_t x = idx;
    for (int k = span - 1; k >= 0; --k) {
      word[k] = static_cast<int>(x % n);
      x /= n;
    }
    auto sub = [&](const LocallyConstantFunction& h) {
      int off = h.window_lo() - lo;
      return h.value_word(std::span<const int>(word.data() + off,
                                               static_cast<size_t>(h.span())));
    };
    vals[idx] = op(sub(f), sub(g));
  }
  return LocallyConstantFunction(n, lo, hi, std::move(vals));
}

// ----------------------------------------------------- WeightedMatrix

WeightedMatrix::WeightedMatrix(const Sft& sft, const LocallyConstantFunction& weight) {
  alphabet_ = sft.alphabet();
  word_len_ = weight.span();
  size_t total = 1;
  for (int i = 0; i < word_len_; ++i) total *= alphabet_;
  index_.assign(total, -1);
  std::vector<int> word(word_len_);
  for (size_t code = 0; code < total; ++code) {
    size_t x = code;
    bool ok = true;
    for (int k = word_len_ - 1; k >= 0; --k) {
      word[k] = static_cast<int>(x % alphabet_);
      x /= alphabet_;
    }
    for (int k = 0; k + 1 < word_len_; ++k)
      if (!sft.allowed(word[k], word[k + 1])) ok = false;
    if (ok) {
      index_[code] = static_cast<int>(words_.size());
      words_.push_back(word);
    }
  }
  dim_ = static_cast<int>(words_.size());
  entries_.assign(static_cast<size_t>(dim_) * dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    const auto& u = words_[i];
    double w = std::exp(weight.value_word(u));
    for (int s = 0; s < alphabet_; ++s) {
      if (!sft.allowed(u.back(), s)) continue;
      std::vector<int> v(u.begin() + 1, u.end());
      v.push_back(s);
      int j = state_index(v);
      if (j >= 0) entries_[static_cast<size_t>(i) * dim_ + j] = w;
    }
  }
}

int WeightedMatrix::state_index(std::span<const int> word) const {
  size_t code = 0;
  for (int v : word) code = code * alphabet_ + static_cast<size_t>(v);
  return index_[code];
}

namespace {

// Power iteration with sum normalization; matrices are primitive so the
// iterates converge geometrically. Stops on the eigen-residual.
std::vector<double> power_iterate(int dim, const std::function<void(const double*, double*)>& mul,
                                  double* eigenvalue) {
  std::vector<double> x(dim, 1.0 / dim), y(dim);
  double lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 100000; ++it) {
    mul(x.data(), y.data());
    double s = std::accumulate(y.begin(), y.end(), 0.0);
    if (!(s > 0.0)) throw std::runtime_error("oracle failure: power iteration degenerate");
    lambda = s;
    double res = 0.0;
    for (int i = 0; i < dim; ++i) res = std::max(res, std::fabs(y[i] - lambda * x[i]));
    for (double& v : y) v /= s;
    x.swap(y);
    if (res / lambda < 1e-13) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("oracle failure: power iteration did not converge");
  *eigenvalue = lambda;
  return x;
}

}  // namespace

PerronData WeightedMatrix::perron() const {
  PerronData out;
  auto mul = [this](const double* x, double* y) {
    for (int i = 0; i < dim_; ++i) y[i] = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) y[j] += entry(i, j) * x[i];
  };
  auto mul_t = [this](const double* x, double* y) {
    for (int i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < dim_; ++j) acc += entry(i, j) * x[j];
      y[i] = acc;
    }
  };
  double lam_r = 0.0, lam_l = 0.0;
  out.right = power_iterate(dim_, mul_t, &lam_r);  // M v = lambda v
  out.left = power_iterate(dim_, mul, &lam_l);     // u M = lambda u
  out.eigenvalue = lam_r;

  double rs = std::accumulate(out.right.begin(), out.right.end(), 0.0);
  for (double& v : out.right) v /= rs;
  double dot = 0.0;
  for (int i = 0; i < dim_; ++i) dot += out.left[i] * out.right[i];
  for (double& v : out.left) v /= dot;

  double res = 0.0;
  std::vector<double> mv(dim_);
  mul_t(out.right.data(), mv.data());
  for (int i = 0; i < dim_; ++i)
    res = std::max(res, std::fabs(mv[i] - out.eigenvalue * out.right[i]));
  out.residual = res / out.eigenvalue;
  if (out.residual >= 1e-10)
    throw std::runtime_error("oracle failure: eigen residual too large");
  for (double v : out.right)
    if (!(v > 0.0)) throw std::runtime_error("oracle failure: nonpositive eigenvector");
  for (double v : out.left)
    if (!(v > 0.0)) throw std::runtime_error("oracle failure: nonpositive eigenvector");
  return out;
}

// ----------------------------------------------------------- pressure

double shift_pressure(const SuspensionSystem& sys, const LocallyConstantFunction& weight) {
  WeightedMatrix m(sys.sft(), weight);
  PerronData p = m.perron();
  return std::log(p.eigenvalue);
}

double flow_pressure(const SuspensionSystem& sys) {
  const auto& sft = sys.sft();
  LocallyConstantFunction psi =
      lcf_combine(sft, sys.potential(), sys.roof(), [](double p, double r) { return p * r; });
  auto pressure_at = [&](double c) {
    LocallyConstantFunction w = lcf_combine(
        sft, psi, sys.roof(), [c](double v, double r) { return v - c * r; });
    return shift_pressure(sys, w);
  };
  double phi_sup = std::max(std::fabs(sys.potential().min_value()),
                            std::fabs(sys.potential().max_value()));
  double margin = phi_sup + std::log(static_cast<double>(sft.alphabet())) / sys.min_roof();
  double lo = -margin - 1.0, hi = margin + 1.0;
  double plo = pressure_at(lo), phi_v = pressure_at(hi);
  if (!(plo > 0.0 && phi_v < 0.0))
    throw std::runtime_error("oracle failure: flow pressure bracket has no sign change");
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    double pm = pressure_at(mid);
    if (pm > plo + 1e-9 || pm < phi_v - 1e-9)
      throw std::runtime_error("oracle failure: pressure not monotone in c");
    if (pm > 0.0) {
      lo = mid;
      plo = pm;
    } else {
      hi = mid;
      phi_v = pm;
    }
  }
  return 0.5 * (lo + hi);
}

// ------------------------------------------------------ OracleMeasure

OracleMeasure::OracleMeasure(const SuspensionSystem& sys, LocallyConstantFunction weight,
                             OracleKind kind, double pressure)
    : kind_(kind), pressure_(pressure), weight_(std::move(weight)), roof_(sys.roof()),
      matrix_(sys.sft(), weight_), perron_(matrix_.perron()) {
  stationary_.resize(matrix_.dimension());
  for (int i = 0; i < matrix_.dimension(); ++i)
    stationary_[i] = perron_.left[i] * perron_.right[i];
  // integral of the roof against the base Gibbs measure
  double rm = 0.0;
  for (int i = 0; i < matrix_.dimension(); ++i) {
    const auto& w = matrix_.state_word(i);
    int off = roof_.window_lo() - weight_.window_lo();
    rm += stationary_[i] * roof_.value_word(std::span<const int>(
                               w.data() + off, static_cast<size_t>(roof_.span())));
  }
  roof_mean_ = rm;
}

OracleMeasure OracleMeasure::shift_gibbs(const SuspensionSystem& sys,
                                         const LocallyConstantFunction& weight) {
  return OracleMeasure(sys, weight, OracleKind::shift_gibbs, 0.0);
}

OracleMeasure OracleMeasure::flow_equilibrium(const SuspensionSystem& sys) {
  double P = flow_pressure(sys);
  LocallyConstantFunction g = lcf_combine(
      sys.sft(), sys.potential(), sys.roof(),
      [P](double p, double r) { return (p - P) * r; });
  return OracleMeasure(sys, g, OracleKind::flow_equilibrium, P);
}

double OracleMeasure::base_mass(std::span<const int> word) const {
  int L = matrix_.word_length();
  int m = static_cast<int>(word.size());
  if (m == 0) return 1.0;
  if (m < L) {
    // Sum over right extensions to the lifted word length.
    double acc = 0.0;
    std::vector<int> ext(word.begin(), word.end());
    ext.resize(L);
    std::function<void(int)> rec = [&](int k) {
      if (k == L) {
        int idx = matrix_.state_index(ext);
        if (idx >= 0) acc += stationary_[idx];
        return;
      }
      for (int s = 0; s < weight_.alphabet(); ++s) {
        ext[k] = s;
        rec(k + 1);
      }
    };
    rec(m);
    return acc;
  }
  int i0 = matrix_.state_index(std::span<const int>(word.data(), static_cast<size_t>(L)));
  if (i0 < 0) return 0.0;
  double mass = stationary_[i0];
  double lambda = perron_.eigenvalue;
  int prev = i0;
  for (int k = 1; k + L <= m; ++k) {
    int next = matrix_.state_index(
        std::span<const int>(word.data() + k, static_cast<size_t>(L)));
    if (next < 0) return 0.0;
    // chain step probability M(u,u') v(u') / (lambda v(u))
    mass *= matrix_.entry(prev, next) * perron_.right[next] /
            (lambda * perron_.right[prev]);
    prev = next;
  }
  return mass;
}

double OracleMeasure::mass(const CylinderSet& c) const {
  if (c.depth() > 64) throw std::invalid_argument("oracle mass: cylinder window too long");
  if (kind_ == OracleKind::shift_gibbs) {
    if (c.fiber) throw std::invalid_argument("shift oracle: no fiber sets");
    return base_mass(c.word);
  }
  // Flow measure: refine the base until the roof over coordinate 0 is
  // determined, then (base mass) * (fiber overlap) / roof_mean per piece.
  int rlo = roof_.window_lo(), rhi = roof_.window_hi();
  int lo = c.base_unconstrained() ? 0 : c.lo;
  int hi = c.base_unconstrained() ? 0 : c.hi;
  int need_lo = std::min(lo, rlo), need_hi = std::max(hi, rhi);
  int len = need_hi - need_lo + 1;
  double acc = 0.0;
  std::vector<int> w(len, 0);
  std::function<void(int)> rec = [&](int k) {
    if (k == len) {
      double rf = roof_.value_word(std::span<const int>(
          w.data() + (rlo - need_lo), static_cast<size_t>(roof_.span())));
      double seg = c.fiber ? std::max(0.0, std::min(c.fiber->hi, rf) -
                                               std::max(c.fiber->lo, 0.0))
                           : rf;
      if (seg > 0.0) acc += base_mass(w) * seg;
      return;
    }
    int coord = need_lo + k;
    if (!c.base_unconstrained() && coord >= lo && coord <= hi) {
      w[k] = c.symbol_at(coord);
      rec(k + 1);
      return;
    }
    for (int s = 0; s < weight_.alphabet(); ++s) {
      w[k] = s;
      rec(k + 1);
    }
  };
  rec(0);
  return acc / roof_mean_;
}

double OracleMeasure::conditional_forward_mass(const SymbolicPoint& leaf, int past_end,
                                               std::span<const int> word) const {
  int L = matrix_.word_length();
  // Enough past that the joint and marginal words overlap the lift length.
  int ctx = L;
  std::vector<int> joint;
  for (int i = past_end - ctx + 1; i <= past_end; ++i) joint.push_back(leaf.at(i));
  std::vector<int> past_only = joint;
  joint.insert(joint.end(), word.begin(), word.end());
  double num = base_mass(joint);
  double den = base_mass(past_only);
  if (den <= 0.0) throw std::runtime_error("conditional mass: null past");
  return num / den;
}

double OracleMeasure::tube_mass(std::span<const int> word, double thickness) const {
  if (kind_ != OracleKind::flow_equilibrium)
    throw std::invalid_argument("tube_mass: flow measure required");
  return base_mass(word) * thickness / roof_mean_;
}

double gibbs_ratio_bound(const SuspensionSystem& sys, const OracleMeasure& oracle,
                         std::span<const GibbsSample> samples) {
  double bound = 1.0;
  for (const auto& smp : samples) {
    if (smp.t < 1.0) throw std::invalid_argument("gibbs_ratio_bound: t must be >= 1");
    SymbolicPoint x0 = smp.point.with_fiber(0.0);
    long n = 0;
    double tstar = 0.0;
    while (tstar < smp.t) {
      tstar += sys.roof_at(x0, n);
      ++n;
    }
    CylinderSet c;
    c.lo = 0;
    c.hi = static_cast<int>(n) - 1 + sys.k_r();
    c.word.resize(c.hi - c.lo + 1);
    for (int i = c.lo; i <= c.hi; ++i) c.word[i - c.lo] = x0.at(i);
    double mass = oracle.mass(c);
    double w = std::exp(birkhoff(sys, x0, tstar) - tstar * oracle.pressure());
    double rho = mass / w;
    bound = std::max(bound, std::max(rho, 1.0 / rho));
  }
  return bound;
}

}  // namespace cdyn
