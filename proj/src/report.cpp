#include "mixsing/report.hpp"

#include "mixsing/error.hpp"

#include <cstdio>
#include <fstream>

namespace mixsing {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  return os;
}

std::string format_row(std::initializer_list<double> values)
{
  std::string out;
  char buf[32];
  for (double v : values) {
    if (!out.empty()) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const Domain& d)
{
  nlohmann::json extent = nlohmann::json::array();
  nlohmann::json n = nlohmann::json::array();
  nlohmann::json h = nlohmann::json::array();
  for (int a = 0; a < d.dim(); ++a) {
    extent.push_back({d.extent(a).lo, d.extent(a).hi});
    n.push_back(d.n_interior(a));
    h.push_back(d.h(a));
  }
  return {{"dim", d.dim()}, {"extent", extent}, {"n_interior", n}, {"h", h}, {"unknowns", d.size()}};
}

nlohmann::json field_summary(const Field& f)
{
  if (f.size() == 0) return nullptr;
  const Norms nm = norms(f);
  return {{"l2", nm.l2},
          {"linf", nm.linf},
          {"h1_semi", nm.h1_semi},
          {"min", f.values.minCoeff()},
          {"max", f.values.maxCoeff()}};
}

nlohmann::json to_json(const ResidualReport& r)
{
  return {{"max_weak_residual", r.max_weak_residual},
          {"n_test_fields", r.n_test_fields},
          {"refinement_ratios", r.refinement_ratios},
          {"symmetry_defect", r.symmetry_defect}};
}

nlohmann::json to_json(const EigenPair& e)
{
  return {{"lambda1", e.lambda1},
          {"residual", e.residual},
          {"iterations", e.iterations},
          {"min_interior", e.min_interior},
          {"lambda2_estimate", e.lambda2_estimate},
          {"simple", e.simple},
          {"e1", field_summary(e.e1)}};
}

nlohmann::json to_json(const PureSingularResult& r)
{
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : r.trace)
    trace.push_back({{"eps", s.eps},
                     {"h1_change", s.h1_change},
                     {"linf", s.linf},
                     {"residual", s.residual},
                     {"newton_iterations", s.newton_iterations}});
  return {{"linf", r.linf},
          {"min_interior", r.min_interior},
          {"residual", r.residual},
          {"max_monotonicity_violation", r.max_monotonicity_violation},
          {"v0", field_summary(r.v0)},
          {"trace", trace}};
}

nlohmann::json to_json(const SandwichCertificate& c)
{
  return {{"a_lambda", c.a_lambda},
          {"b_lambda", c.b_lambda},
          {"weak_residual", c.residual},
          {"newton_residual", c.newton_residual},
          {"iterations", c.iterations},
          {"polish_iterations", c.polish_iterations},
          {"polished", c.polished},
          {"shift_max", c.shift_max},
          {"shift_retried", c.shift_retried},
          {"min_interior", c.min_interior},
          {"linf", c.linf},
          {"energy", c.energy},
          {"ordering_defect", c.ordering_defect},
          {"sub", field_summary(c.sub)},
          {"sup", field_summary(c.sup)},
          {"solution", field_summary(c.solution)},
          {"pure", to_json(c.pure)}};
}

nlohmann::json to_json(const MountainPassParams& p)
{
  return {{"R", p.R},
          {"rho", p.rho},
          {"T", p.T},
          {"Lambda_est", p.Lambda_est},
          {"k", p.k},
          {"k_shrinks", p.k_shrinks},
          {"theta", p.theta},
          {"embedding_C", p.embedding_C},
          {"singular_sup_bound", p.singular_sup_bound},
          {"lambda1_local", p.lambda1_local}};
}

nlohmann::json to_json(const RimCheck& r)
{
  return {{"count", r.count}, {"violations", r.violations}, {"min_energy", r.min_energy}};
}

nlohmann::json to_json(const TwoSolutions& t)
{
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : t.eps_trace)
    trace.push_back({{"eps", e.eps},
                     {"energy_nu", e.energy_nu},
                     {"energy_zeta", e.energy_zeta},
                     {"residual_nu", e.residual_nu},
                     {"residual_zeta", e.residual_zeta},
                     {"h1_nu", e.h1_nu},
                     {"h1_zeta", e.h1_zeta},
                     {"change_nu", e.change_nu},
                     {"change_zeta", e.change_zeta},
                     {"barrier_margin", e.barrier_margin},
                     {"mp_sweeps", e.mp_sweeps}});
  return {{"energy_nu", t.energy_nu},
          {"energy_zeta", t.energy_zeta},
          {"nu", field_summary(t.nu)},
          {"zeta", field_summary(t.zeta)},
          {"barrier", field_summary(t.barrier)},
          {"barrier_min", t.barrier_min},
          {"barrier_constant", t.barrier_constant},
          {"geometry", to_json(t.params)},
          {"Theta", t.Theta},
          {"residual_nu", to_json(t.residual_nu)},
          {"residual_zeta", to_json(t.residual_zeta)},
          {"newton_residual_nu", t.newton_residual_nu},
          {"newton_residual_zeta", t.newton_residual_zeta},
          {"distinctness", t.distinctness},
          {"distinctness_ratio", t.distinctness_ratio},
          {"limit_gap_nu", t.limit_gap_nu},
          {"limit_gap_zeta", t.limit_gap_zeta},
          {"eps_trace", trace}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
  auto os = open_for_write(path);
  os << j.dump(2) << '\n';
}

void write_field(const std::filesystem::path& path, const Field& f)
{
  auto os = open_for_write(path);
  write_field_csv(os, f);
}

void write_eps_trace(const std::filesystem::path& path, const std::vector<EpsTraceEntry>& trace)
{
  auto os = open_for_write(path);
  os << "eps,energy_nu,energy_zeta,residual_nu,residual_zeta,h1_nu,h1_zeta,change_nu,change_zeta,barrier_margin,"
        "mp_sweeps\n";
  for (const auto& e : trace)
    os << format_row({e.eps, e.energy_nu, e.energy_zeta, e.residual_nu, e.residual_zeta, e.h1_nu, e.h1_zeta,
                      e.change_nu, e.change_zeta, e.barrier_margin})
       << ',' << e.mp_sweeps << '\n';
}

void write_continuation_trace(const std::filesystem::path& path, const std::vector<ContinuationStep>& trace)
{
  auto os = open_for_write(path);
  os << "eps,h1_change,linf,residual,newton_iterations\n";
  for (const auto& s : trace) os << format_row({s.eps, s.h1_change, s.linf, s.residual}) << ',' << s.newton_iterations << '\n';
}

}  // namespace mixsing
