#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mtmv/riccati_chain.hpp"

namespace mtmv {

/// Per-checkpoint feasibility flags for the mean targets. The solver
/// succeeds iff every flag is true.
struct FeasibilityReport {
  /// L_i - L_{i-1} e^{int r} > 0 for i = 1..N (L_0 = y).
  std::vector<bool> growth_ok;
  /// Second target inequality, evaluated during the backward recursion for
  /// i = 1..N-1 (equivalent to the numerator of mu_i being positive).
  std::vector<bool> convexity_ok;
  /// mu_i > 0 for i = 1..N.
  std::vector<bool> resulting_mu_positive;

  bool ok() const;
  std::string to_string() const;
};

/// Thrown when the mean targets admit no positive variance weights; names
/// the failing checkpoint index (1-based) and the violated inequality.
class InfeasibleTargetsError : public std::runtime_error {
 public:
  InfeasibleTargetsError(int index, std::string inequality, FeasibilityReport report);

  int index() const { return index_; }
  const std::string& inequality() const { return inequality_; }
  const FeasibilityReport& report() const { return report_; }

 private:
  int index_;
  std::string inequality_;
  FeasibilityReport report_;
};

struct MultiplierSolution {
  MultiplierSet multipliers;
  RiccatiChain chain;
  FeasibilityReport feasibility;
};

/// Backward recursion for the multipliers (mu, lambda) that make the
/// feedback strategy meet every checkpoint mean target, solving the Riccati
/// chain segment by segment as it goes. Throws InfeasibleTargetsError when a
/// target inequality fails or a variance weight comes out nonpositive.
MultiplierSolution solve_multipliers(const ProblemSpec& spec);

/// Dry run of the same recursion: evaluates every inequality and never
/// throws for infeasible targets.
FeasibilityReport check_feasibility(const ProblemSpec& spec);

/// Two-checkpoint fast path: the four closed forms for
/// (mu_2, lambda_2, mu_1, lambda_1) with each exponential taken over the
/// actual segment. Agrees with solve_multipliers to 1e-10 relative.
MultiplierSet solve_n2_closed_form(const ProblemSpec& spec);

}  // namespace mtmv
