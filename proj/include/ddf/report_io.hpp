// Report serialization: JSON documents with stable key order, CSV tables
// with a header row, and atomic file writes (temp + rename) so a crash never
// leaves a partial artifact. All floating point text uses %.17g, which round
// trips doubles exactly; repeated runs of a deterministic pipeline therefore
// produce byte-identical files.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddf/analysis.hpp"
#include "ddf/core.hpp"
#include "ddf/fem.hpp"
#include "ddf/measures.hpp"
#include "ddf/solver.hpp"
#include "ddf/trace.hpp"
#include "ddf/weakform.hpp"

namespace ddf {

using ojson = nlohmann::ordered_json;

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_atomic(const std::string& path, const std::string& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw resource_error("cannot open '" + tmp.string() + "' for writing");
    out << body;
    if (!out) throw resource_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec)
    throw resource_error("cannot move '" + tmp.string() + "' into place: " +
                         ec.message());
}

inline void write_json_atomic(const std::string& path, const ojson& doc) {
  write_text_atomic(path, doc.dump(2) + "\n");
}

// Solution table: one row per mesh vertex.
inline std::string solution_csv(const SolutionField& rho) {
  std::ostringstream out;
  out << "vertex,x1,x2,rho\n";
  const Mesh& mesh = rho.mesh();
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    out << v << ',' << g17(mesh.vertices[v].x) << ',' << g17(mesh.vertices[v].y)
        << ',' << g17(rho.nodal()[v]) << '\n';
  return out.str();
}

// Reads a solution table back and checks it matches the mesh: same vertex
// count, ids in order, coordinates within a round-trip tolerance.
inline std::vector<double> read_solution_csv(const std::string& path,
                                             const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) throw validation_error("solution: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "vertex,x1,x2,rho")
    throw validation_error("solution: '" + path +
                           "' must start with header vertex,x1,x2,rho");
  std::vector<double> nodal;
  nodal.reserve(mesh.vertices.size());
  const double tol = 1e-9;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long id = 0;
    double x = 0.0, y = 0.0, v = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> id >> c1 >> x >> c2 >> y >> c3 >> v) || c1 != ',' || c2 != ',' ||
        c3 != ',')
      throw validation_error("solution: " + path + ":" + std::to_string(row) +
                             ": malformed row");
    if (id != static_cast<long>(nodal.size()))
      throw validation_error("solution: " + path + ":" + std::to_string(row) +
                             ": vertex ids must be 0..N-1 in order");
    if (nodal.size() >= mesh.vertices.size())
      throw validation_error("solution: '" + path +
                             "' has more rows than the mesh has vertices");
    const Vec2& p = mesh.vertices[nodal.size()];
    if (std::abs(p.x - x) > tol || std::abs(p.y - y) > tol)
      throw validation_error("solution: " + path + ":" + std::to_string(row) +
                             ": vertex position does not match the config mesh");
    nodal.push_back(v);
  }
  if (nodal.size() != mesh.vertices.size())
    throw validation_error("solution: '" + path + "' has " +
                           std::to_string(nodal.size()) + " rows but the mesh has " +
                           std::to_string(mesh.vertices.size()) + " vertices");
  return nodal;
}

inline ojson to_json(const Vec2& v) { return ojson::array({v.x, v.y}); }

inline ojson to_json(const BoundaryMeasure& mu) {
  ojson j;
  j["nodes"] = mu.grid().size();
  ojson atoms = ojson::array();
  for (const Atom& a : mu.atoms())
    atoms.push_back(ojson{{"param", a.param}, {"weight", a.weight}});
  j["atoms"] = std::move(atoms);
  j["density"] = mu.density();
  j["total_mass"] = mu.total_mass();
  j["total_variation"] = total_variation(mu);
  return j;
}

inline ojson to_json(const ConvergenceReport& rep) {
  ojson j;
  j["converged"] = rep.converged;
  j["weak_only"] = rep.weak_only;
  j["monotone_warning"] = rep.monotone_warning;
  j["final_n"] = rep.final_n;
  j["final_increment"] = rep.final_increment;
  j["p"] = rep.p;
  j["p_prime"] = rep.p_prime;
  j["tol"] = rep.tol;
  ojson levels = ojson::array();
  for (const LevelRecord& r : rep.levels) {
    ojson l;
    l["n"] = r.n;
    l["eps"] = r.eps;
    l["norm_lpp"] = r.norm_lpp;
    l["increment_lpp"] = r.increment_lpp;
    l["bl_eta"] = r.bl_eta;
    l["dist_A_sup"] = r.dist_A_sup;
    l["dist_b_Lp"] = r.dist_b_Lp;
    l["dist_G_Lpp"] = r.dist_G_Lpp;
    l["dist_h_L1"] = r.dist_h_L1;
    l["supg_used"] = r.supg_used;
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  return j;
}

inline ojson to_json(const ResidualReport& rep) {
  ojson j;
  j["max_relative"] = rep.max_relative;
  j["median_relative"] = rep.median_relative;
  ojson entries = ojson::array();
  for (const ResidualEntry& e : rep.entries) {
    ojson t;
    t["name"] = e.name;
    t["lhs"] = e.lhs;
    t["rhs"] = e.rhs;
    t["boundary"] = e.boundary;
    t["residual"] = e.residual;
    t["scale"] = e.scale;
    t["relative"] = e.relative;
    entries.push_back(std::move(t));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline ojson to_json(const AprioriReport& rep) {
  ojson j;
  j["envelope"] = rep.envelope;
  j["p"] = rep.p;
  j["p_prime"] = rep.p_prime;
  ojson entries = ojson::array();
  for (const AprioriEntry& e : rep.entries) {
    ojson t;
    t["label"] = e.label;
    t["rho_norm"] = e.rho_norm;
    t["tv_eta"] = e.tv_eta;
    t["h_l1"] = e.h_l1;
    t["g_lpp"] = e.g_lpp;
    t["data_norm"] = e.data_norm;
    t["ratio"] = e.ratio;
    t["ratio_defined"] = e.ratio_defined;
    t["uniqueness_ok"] = e.uniqueness_ok;
    entries.push_back(std::move(t));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline ojson to_json(const ProofConstant& c) {
  ojson j;
  j["total"] = c.total;
  j["term_solution"] = c.term_solution;
  j["term_data"] = c.term_data;
  j["term_sup"] = c.term_sup;
  j["phi_c2"] = c.phi_c2;
  j["theta"] = c.theta;
  j["delta"] = c.delta;
  j["rho_max"] = c.rho_max;
  return j;
}

inline ojson to_json(const TraceDiagnostics& tr) {
  ojson j;
  j["delta"] = tr.delta;
  j["signed_mode"] = tr.signed_mode;
  j["bound"] = tr.bound;
  if (!tr.signed_mode) j["constant"] = to_json(tr.constant);
  j["converged"] = tr.converged;
  j["no_convergence_warning"] = tr.no_convergence_warning;
  j["mass_violations"] = tr.mass_violations;
  ojson levels = ojson::array();
  for (const TraceLevelRecord& r : tr.levels) {
    ojson l;
    l["eps"] = r.eps;
    l["mass"] = r.mass;
    l["bl_prev"] = r.bl_prev;
    l["mass_ok"] = r.mass_ok;
    l["max_commutation"] = r.max_commutation;
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  j["final_density"] = tr.final_density;
  j["kappa"] = tr.kappa_values.values;
  j["eta_tilde"] = to_json(tr.eta_tilde);
  j["eta"] = to_json(tr.eta);
  if (!tr.end_to_end.entries.empty()) j["end_to_end"] = to_json(tr.end_to_end);
  return j;
}

inline ojson to_json(const RadiusSweepReport& rep) {
  ojson j;
  j["median_discrepancy"] = rep.median_discrepancy;
  j["fubini_shell"] = rep.fubini_shell;
  j["fubini_volume"] = rep.fubini_volume;
  j["fubini_gap"] = rep.fubini_gap;
  j["mass_violations"] = rep.mass_violations;
  ojson entries = ojson::array();
  for (const RadiusSweepEntry& e : rep.entries) {
    ojson t;
    t["r"] = e.r;
    t["discrepancy"] = e.discrepancy;
    t["mass"] = e.mass;
    t["converged"] = e.converged;
    entries.push_back(std::move(t));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline ojson to_json(const HarnackReport& rep) {
  ojson j;
  j["x0"] = to_json(rep.x0);
  j["R"] = rep.R;
  j["positive"] = rep.positive;
  j["ratio_spread"] = rep.ratio_spread;
  ojson obs = ojson::array();
  for (const HarnackObservation& o : rep.observations) {
    ojson t;
    t["mesh_h"] = o.mesh_h;
    t["final_n"] = o.final_n;
    t["sup"] = o.sup;
    t["inf"] = o.inf;
    t["ratio"] = o.ratio;
    t["ratio_defined"] = o.ratio_defined;
    t["argmax"] = to_json(o.argmax);
    t["ball_nodes"] = o.ball_nodes;
    obs.push_back(std::move(t));
  }
  j["observations"] = std::move(obs);
  return j;
}

inline ojson to_json(const ModulusReport& rep) {
  ojson j;
  j["r_edges"] = rep.r_edges;
  j["curves"] = rep.curves;
  j["envelope"] = rep.envelope;
  j["sup_norms"] = rep.sup_norms;
  j["collapse_spread"] = rep.collapse_spread;
  j["sup_bounded"] = rep.sup_bounded;
  return j;
}

}  // namespace ddf
