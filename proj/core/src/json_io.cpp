#include "mtmv/json_io.hpp"

#include <json.hpp>

namespace mtmv {

namespace {

using nlohmann::json;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json flags(const std::vector<bool>& v) {
  json out = json::array();
  for (bool b : v) out.push_back(b);
  return out;
}

json moment_paths_json(const MomentPaths& p) {
  return json{{"segment_offsets", p.segment_offsets},
              {"time", p.time},
              {"mean", p.mean},
              {"second_moment", p.second_moment},
              {"variance", p.variance},
              {"checkpoint_means", p.checkpoint_means},
              {"checkpoint_variances", p.checkpoint_variances}};
}

json chain_json(const RiccatiChain& chain) {
  json segments = json::array();
  for (const auto& s : chain.segments()) {
    segments.push_back(json{{"t_lo", s.t_lo},
                            {"t_hi", s.t_hi},
                            {"rho", s.rho},
                            {"p_end", s.p_end},
                            {"g_end", s.g_end},
                            {"ratio_end", s.ratio_end},
                            {"p_start", s.p_start},
                            {"g_start", s.g_start},
                            {"offset", s.offset}});
  }
  return json{{"segments", segments}};
}

json feasibility_json(const FeasibilityReport& r) {
  return json{{"growth_ok", flags(r.growth_ok)},
              {"convexity_ok", flags(r.convexity_ok)},
              {"resulting_mu_positive", flags(r.resulting_mu_positive)},
              {"ok", r.ok()}};
}

}  // namespace

std::string to_json(const FeasibilityReport& report) {
  return dump(feasibility_json(report));
}

std::string to_json(const MultiplierSet& mult) {
  return dump(json{{"mu", mult.mu}, {"lambda", mult.lambda}, {"rho", mult.rho}});
}

std::string to_json(const RiccatiChain& chain) { return dump(chain_json(chain)); }

std::string to_json(const MultiplierSolution& solution, const ProblemSpec& spec) {
  json j{{"checkpoints", std::vector<double>(spec.checkpoints().begin(),
                                             spec.checkpoints().end())},
         {"initial_wealth", spec.initial_wealth()},
         {"targets", std::vector<double>(spec.targets().begin(), spec.targets().end())},
         {"mu", solution.multipliers.mu},
         {"lambda", solution.multipliers.lambda},
         {"rho", solution.multipliers.rho},
         {"feasibility", feasibility_json(solution.feasibility)},
         {"riccati", chain_json(solution.chain)}};
  return dump(j);
}

std::string to_json(const PolicyReport& report) {
  json j{{"model", moment_paths_json(report.model)}};
  if (report.classical_baseline) {
    j["classical_baseline"] = moment_paths_json(*report.classical_baseline);
  }
  return dump(j);
}

std::string to_json(const SimulationReport& report) {
  json checkpoints = json::array();
  for (const auto& c : report.checkpoints) {
    checkpoints.push_back(json{{"time", c.time},
                               {"mean", c.mean},
                               {"variance", c.variance},
                               {"se_mean", c.se_mean},
                               {"se_variance", c.se_variance}});
  }
  json mdd = json::array();
  for (const auto& m : report.mdd) {
    mdd.push_back(json{{"horizon", m.horizon}, {"mean", m.mean}, {"se", m.se}});
  }
  json fan = json::array();
  for (const auto& q : report.quantile_fan) {
    fan.push_back(json{{"time", q.time},
                       {"q05", q.q05},
                       {"q25", q.q25},
                       {"q50", q.q50},
                       {"q75", q.q75},
                       {"q95", q.q95}});
  }
  return dump(json{{"seed", report.seed},
                   {"step", report.step},
                   {"n_paths", report.n_paths},
                   {"flagged_paths", report.flagged_paths},
                   {"checkpoints", checkpoints},
                   {"mdd", mdd},
                   {"quantile_fan", fan}});
}

std::string to_json(const ComparisonReport& report) {
  return dump(json{{"target_1", report.target_1},
                   {"target_2", report.target_2},
                   {"var_multi", {report.var_multi_1, report.var_multi_2}},
                   {"var_classical", {report.var_classical_1, report.var_classical_2}},
                   {"sum_multi", report.sum_multi},
                   {"sum_classical", report.sum_classical},
                   {"window", {{"lo", report.window_lo}, {"hi", report.window_hi}}},
                   {"var1_strictly_smaller", report.var1_strictly_smaller},
                   {"var2_strictly_larger", report.var2_strictly_larger},
                   {"sum_dominance", report.sum_dominance},
                   {"l1_in_window", report.l1_in_window}});
}

std::string to_json(const SweepTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json row{{"theta", r.theta},
             {"target_1", r.target_1},
             {"target_2", r.target_2},
             {"feasible", r.feasible}};
    json mdd = json::array();
    for (const auto& m : r.mdd) {
      mdd.push_back(json{{"horizon", m.horizon}, {"mean", m.mean}, {"se", m.se}});
    }
    row["mdd"] = mdd;
    rows.push_back(std::move(row));
  }
  return dump(json{{"horizons", table.horizons},
                   {"skipped", table.skipped},
                   {"rows", rows}});
}

}  // namespace mtmv
