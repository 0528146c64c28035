#include "fermi1d/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace fermi1d {

namespace {

Json array(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Eigen::VectorXd vector_from(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

Json to_json(const GridFunction& f) { return Json{{"n_cells", f.grid().n_cells()}, {"values", array(f.values())}}; }

GridFunction grid_function_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n_cells") || !j.contains("values") || !j["n_cells"].is_number_integer()) {
    throw ValidationError("grid function needs integer \"n_cells\" and array \"values\"");
  }
  return GridFunction(Grid(j["n_cells"].get<int>()), vector_from(j["values"], "values"));
}

Json to_json(const Interaction& w) {
  switch (w.kind()) {
    case Interaction::Kind::Zero: return Json{{"kind", "zero"}};
    case Interaction::Kind::Convolution:
      return Json{{"kind", "convolution"}, {"samples", array(w.convolution_samples())}};
    case Interaction::Kind::General: {
      Json rows = Json::array();
      const auto& m = w.general_values();
      for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(array(Eigen::VectorXd(m.row(i).transpose())));
      return Json{{"kind", "general"}, {"n_cells", w.kernel_grid().n_cells()}, {"values", rows}};
    }
  }
  return Json();
}

Interaction interaction_from_json(const Json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "zero") return Interaction::zero();
  if (kind == "convolution") return Interaction::convolution(vector_from(j.at("samples"), "samples"));
  if (kind == "general") {
    const Grid g(j.at("n_cells").get<int>());
    const Json& rows = j.at("values");
    if (!rows.is_array() || static_cast<int>(rows.size()) != g.n_nodes()) {
      throw ValidationError("general kernel needs " + std::to_string(g.n_nodes()) + " rows");
    }
    Eigen::MatrixXd m(g.n_nodes(), g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) {
      const auto r = vector_from(rows[i], "kernel row");
      if (r.size() != g.n_nodes()) throw ValidationError("kernel rows need " + std::to_string(g.n_nodes()) + " values");
      m.row(i) = r.transpose();
    }
    return Interaction::general(g, std::move(m));
  }
  throw ValidationError("unknown interaction kind '" + kind + "'");
}

Json to_json(const ExternalPotential& v) {
  Json d = Json::array();
  for (const auto& t : v.deltas()) d.push_back(Json{{"position", t.position}, {"weight", t.weight}});
  return Json{{"regular", to_json(v.regular())}, {"deltas", d}, {"constant", v.constant()}};
}

Json to_json(const EigenSolution& s) {
  Json vecs = Json::array();
  for (const auto& f : s.eigenvectors) vecs.push_back(array(f.values()));
  return Json{{"bc", to_string(s.bc)},
              {"n_cells", s.grid.n_cells()},
              {"eigenvalues", array(s.eigenvalues)},
              {"eigenvectors", vecs}};
}

Json to_json(const RepresentabilityReport& r) {
  return Json{{"integral", r.integral},         {"min_value", r.min_value}, {"h1_norm", r.h1_norm},
              {"endpoint_match", r.endpoint_match}, {"in_RN", r.in_RN},    {"in_DN", r.in_DN},
              {"in_DN_plus", r.in_DN_plus}};
}

Json to_json(const InversionResult& r) {
  return Json{{"converged", r.converged},
              {"message", r.message},
              {"iterations", r.iterations},
              {"lambda1", r.lambda1},
              {"objective", r.objective},
              {"density_residual", r.density_residual},
              {"gap", r.gap},
              {"degenerate", r.degenerate},
              {"potential", to_json(r.v.regular())},
              {"density", to_json(r.density)},
              {"residual_history", array(r.residual_history)},
              {"objective_history", array(r.objective_history)}};
}

Json to_json(const FunctionalValue& f) {
  return Json{{"f_ll", f.f_ll},
              {"t_ks", f.t_ks},
              {"e_h", f.e_h},
              {"e_xc", f.e_xc},
              {"v_h", to_json(f.v_h)},
              {"v_xc", to_json(f.v_xc)},
              {"interacting", to_json(f.interacting)},
              {"non_interacting", to_json(f.non_interacting)}};
}

Json to_json(const KSResult& r) {
  Json orbitals = Json::array();
  for (const auto& o : r.orbitals) orbitals.push_back(array(o.values()));
  Json trace = Json::array();
  for (const auto& s : r.trace) trace.push_back(Json{{"iteration", s.iteration}, {"residual", s.residual}, {"energy", s.energy}});
  return Json{{"converged", r.converged},
              {"message", r.message},
              {"iterations", r.iterations},
              {"aufbau", to_string(r.aufbau)},
              {"aufbau_ok", r.aufbau_ok},
              {"energy", r.energy},
              {"t_ks", r.t_ks},
              {"e_h", r.e_h},
              {"e_xc", r.e_xc},
              {"external", r.external},
              {"orbital_eigenvalues", array(r.orbital_eigenvalues)},
              {"density", to_json(r.density.rho())},
              {"v_h", to_json(r.v_h)},
              {"v_xc", to_json(r.v_xc)},
              {"orbitals", orbitals},
              {"trace", trace}};
}

Json to_json(const Check& c) {
  Json j{{"label", c.label}, {"value", c.value}, {"relation", c.relation}, {"pass", c.pass}};
  if (c.relation != "<=") j["lower"] = c.lower;
  if (c.relation != ">=") j["upper"] = c.upper;
  return j;
}

Json to_json(const ScenarioReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return Json{{"scenario", r.name}, {"summary", r.summary}, {"pass", r.pass()},
              {"checks", checks},   {"notes", r.notes},     {"timing", {{"seconds", r.seconds}}}};
}

Table nodal_table(const Grid& g, const std::vector<std::pair<std::string, const GridFunction*>>& columns) {
  Table t;
  t.header.push_back("x");
  const Eigen::VectorXd x = g.nodes();
  t.columns.emplace_back(x.data(), x.data() + x.size());
  for (const auto& [name, f] : columns) {
    t.header.push_back(name);
    t.columns.emplace_back(f->values().data(), f->values().data() + f->size());
  }
  return t;
}

Table residual_table(const InversionResult& r) {
  Table t{{"iteration", "residual", "objective"}, {{}, r.residual_history, {}}};
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
    t.columns[0].push_back(static_cast<double>(k));
    t.columns[2].push_back(k < r.objective_history.size() ? r.objective_history[k] : std::nan(""));
  }
  return t;
}

Table trace_table(const KSResult& r) {
  Table t{{"iteration", "residual", "energy"}, {{}, {}, {}}};
  for (const auto& s : r.trace) {
    t.columns[0].push_back(s.iteration);
    t.columns[1].push_back(s.residual);
    t.columns[2].push_back(s.energy);
  }
  return t;
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
  os << '\n';
  const std::size_t rows = t.columns.empty() ? 0 : t.columns[0].size();
  char buf[40];
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12e", t.columns[c][i]);
      os << (c ? "," : "") << buf;
    }
    os << '\n';
  }
}

void write_csv(const std::string& path, const Table& t) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open '" + path + "' for writing");
  write_csv(f, t);
}

}  // namespace fermi1d
