#pragma once

#include <functional>
#include <vector>

#include "carathedyn/system.hpp"

namespace cdyn {

// Pointwise algebra on locally constant functions; the result lives on the
// union window.
LocallyConstantFunction lcf_combine(
    const Sft& sft, const LocallyConstantFunction& f,
    const LocallyConstantFunction& g,
    const std::function<double(double, double)>& op);

struct PerronData {
  double eigenvalue = 0.0;
  std::vector<double> left, right;  // left.right = 1, right sums to 1
  double residual = 0.0;
};

// Nonnegative transition matrix on admissible words of the weight's window
// length, entry e^{weight(source word)} on allowed one-step overlaps.
class WeightedMatrix {
 public:
  WeightedMatrix(const Sft& sft, const LocallyConstantFunction& weight);

  int dimension() const { return dim_; }
  int word_length() const { return word_len_; }
  const std::vector<int>& state_word(int idx) const { return words_[idx]; }
  int state_index(std::span<const int> word) const;
  double entry(int i, int j) const { return entries_[static_cast<size_t>(i) * dim_ + j]; }

  PerronData perron() const;

 private:
  int dim_ = 0;
  int word_len_ = 1;
  int alphabet_ = 0;
  std::vector<std::vector<int>> words_;
  std::vector<int> index_;  // dense word-code -> state index, -1 if inadmissible
  std::vector<double> entries_;
};

double shift_pressure(const SuspensionSystem& sys, const LocallyConstantFunction& weight);
double flow_pressure(const SuspensionSystem& sys);

enum class OracleKind { shift_gibbs, flow_equilibrium };

// Gibbs/equilibrium cylinder masses from Perron eigendata of the lifted
// weighted matrix. For flow measures the weight is (potential - P) * roof.
class OracleMeasure {
 public:
  static OracleMeasure shift_gibbs(const SuspensionSystem& sys,
                                   const LocallyConstantFunction& weight);
  static OracleMeasure flow_equilibrium(const SuspensionSystem& sys);

  OracleKind kind() const { return kind_; }
  const PerronData& perron() const { return perron_; }
  double roof_mean() const { return roof_mean_; }
  double pressure() const { return pressure_; }

  // Shift-invariant mass of a base cylinder word (any coordinate placement).
  double base_mass(std::span<const int> word) const;
  // Mass of a base cylinder x fiber set under the flow measure; fiber
  // std::nullopt means the full fiber over each base point.
  double mass(const CylinderSet& c) const;
  // Mass of the forward word given an infinite past (conditional measure on
  // an unstable leaf); `past_end` is the coordinate of the last past symbol.
  double conditional_forward_mass(const SymbolicPoint& leaf, int past_end,
                                  std::span<const int> word) const;
  // Flow measure of a tube: base cylinder crossed with a fiber-offset
  // interval of the given temporal thickness (shorter than the roof).
  double tube_mass(std::span<const int> word, double thickness) const;

 private:
  OracleMeasure(const SuspensionSystem& sys, LocallyConstantFunction weight,
                OracleKind kind, double pressure);

  OracleKind kind_;
  double pressure_ = 0.0;
  double roof_mean_ = 1.0;
  LocallyConstantFunction weight_;
  LocallyConstantFunction roof_;
  WeightedMatrix matrix_;
  PerronData perron_;
  std::vector<double> stationary_;  // pi(u) = left(u) * right(u)
};

struct GibbsSample {
  SymbolicPoint point;
  double t;
};

// Empirical Gibbs constant: max over samples of max(rho, 1/rho) where
// rho = mu(B_t(x,r)) / e^{Phi(x,t*) - t* P} with t* the completed-crossing
// order and the ball realized as the cylinder over [0, n-1+k_r].
double gibbs_ratio_bound(const SuspensionSystem& sys, const OracleMeasure& oracle,
                         std::span<const GibbsSample> samples);

}  // namespace cdyn
