// Run configuration: a small structured text format with nested sections and
// typed scalars, parsed into a tree and assembled into solver inputs. The
// grammar is line oriented and frozen by golden tests:
//
//   # comment to end of line
//   section {
//     key = value            scalars: 1.5, true, disk, "x1*x2", [1, 2], (0, 1)
//     nested { ... }         repeated sections accumulate (atom blocks)
//   }
//
// Quoted strings hold coefficient expressions over x1, x2, or csv: paths to
// sampled grids. Every lookup failure reports the file, line, and dotted
// field path.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/measures.hpp"
#include "ddf/solver.hpp"
#include "ddf/trace.hpp"

namespace ddf {

struct ConfigValue {
  enum class Kind { number, boolean, text, ident, list, pair };
  Kind kind = Kind::number;
  double num = 0.0;
  bool flag = false;
  std::string str;            // text and ident payloads
  std::vector<double> items;  // list payload
  Vec2 point{0.0, 0.0};       // pair payload
  int line = 0;
};

class ConfigSection {
 public:
  ConfigSection() = default;
  ConfigSection(std::string origin, std::string path, int line)
      : origin_(std::move(origin)), path_(std::move(path)), line_(line) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }

  bool has(const std::string& key) const { return find(key) != nullptr; }
  bool has_section(const std::string& name) const {
    for (const auto& c : children_)
      if (c.leaf_name() == name) return true;
    return false;
  }

  double number(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::number)
      throw fail(key, v.line, "expected a number");
    return v.num;
  }
  double number_or(const std::string& key, double def) const {
    return has(key) ? number(key) : def;
  }

  long integer(const std::string& key) const {
    const double v = number(key);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
      throw fail(key, require(key).line, "expected an integer");
    return n;
  }
  long integer_or(const std::string& key, long def) const {
    return has(key) ? integer(key) : def;
  }

  bool flag_or(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::boolean)
      throw fail(key, v.line, "expected true or false");
    return v.flag;
  }

  std::string text(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::text)
      throw fail(key, v.line, "expected a quoted string");
    return v.str;
  }
  std::string text_or(const std::string& key, const std::string& def) const {
    return has(key) ? text(key) : def;
  }

  std::string ident(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::ident)
      throw fail(key, v.line, "expected a bare identifier");
    return v.str;
  }
  std::string ident_or(const std::string& key, const std::string& def) const {
    return has(key) ? ident(key) : def;
  }

  std::vector<double> list(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::list)
      throw fail(key, v.line, "expected a list like [1, 2, 3]");
    return v.items;
  }

  Vec2 point(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::pair)
      throw fail(key, v.line, "expected a pair like (0, 0)");
    return v.point;
  }
  Vec2 point_or(const std::string& key, const Vec2& def) const {
    return has(key) ? point(key) : def;
  }

  // A scalar that is a number, quoted string, or bare word, for fields that
  // accept constants and expressions alike.
  const ConfigValue& raw(const std::string& key) const { return require(key); }

  const ConfigSection& child(const std::string& name) const {
    const ConfigSection* hit = nullptr;
    for (const auto& c : children_)
      if (c.leaf_name() == name) {
        if (hit)
          throw validation_error(origin_ + ":" + std::to_string(c.line_) +
                                 ": section '" + c.path_ + "' repeated");
        hit = &c;
      }
    if (!hit)
      throw validation_error(origin_ + ": missing section '" + join(name) + "'");
    return *hit;
  }

  const ConfigSection* child_if(const std::string& name) const {
    return has_section(name) ? &child(name) : nullptr;
  }

  std::vector<const ConfigSection*> children(const std::string& name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& c : children_)
      if (c.leaf_name() == name) out.push_back(&c);
    return out;
  }

  // Strict key screening: unknown keys are configuration mistakes and get a
  // diagnostic naming the line rather than silent acceptance.
  void reject_unknown(const std::vector<std::string>& keys,
                      const std::vector<std::string>& sections) const {
    for (const auto& [k, v] : values_) {
      bool ok = false;
      for (const auto& a : keys) ok = ok || a == k;
      if (!ok) throw fail(k, v.line, "unknown field");
    }
    for (const auto& c : children_) {
      bool ok = false;
      for (const auto& a : sections) ok = ok || a == c.leaf_name();
      if (!ok)
        throw validation_error(origin_ + ":" + std::to_string(c.line_) +
                               ": unknown section '" + c.path_ + "'");
    }
  }

  // Parser plumbing.
  void add_value(const std::string& key, ConfigValue v, int line) {
    if (find(key))
      throw validation_error(origin_ + ":" + std::to_string(line) + ": field '" +
                             join(key) + "' repeated");
    values_.emplace_back(key, std::move(v));
  }
  ConfigSection& add_child(const std::string& name, int line) {
    children_.emplace_back(origin_, path_.empty() ? name : path_ + "." + name,
                           line);
    return children_.back();
  }

 private:
  std::string leaf_name() const {
    const auto pos = path_.rfind('.');
    return pos == std::string::npos ? path_ : path_.substr(pos + 1);
  }
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const ConfigValue* find(const std::string& key) const {
    for (const auto& [k, v] : values_)
      if (k == key) return &v;
    return nullptr;
  }
  const ConfigValue& require(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v)
      throw validation_error(origin_ + ": missing field '" + join(key) + "'");
    return *v;
  }
  validation_error fail(const std::string& key, int line,
                        const std::string& what) const {
    return validation_error(origin_ + ":" + std::to_string(line) + ": field '" +
                           join(key) + "': " + what);
  }

  std::string origin_ = "<config>";
  std::string path_;
  int line_ = 0;
  std::vector<std::pair<std::string, ConfigValue>> values_;
  std::vector<ConfigSection> children_;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

inline bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && finite(out);
}

inline std::vector<double> parse_number_csv(const std::string& body,
                                            const std::string& origin, int line,
                                            const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  const std::string inner = trim(body);
  if (inner.empty()) return out;
  while (start <= inner.size()) {
    const std::size_t comma = inner.find(',', start);
    const std::string tok =
        trim(comma == std::string::npos ? inner.substr(start)
                                        : inner.substr(start, comma - start));
    double v = 0.0;
    if (!parse_number(tok, v))
      throw validation_error(origin + ":" + std::to_string(line) + ": " + what +
                             ": '" + tok + "' is not a number");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline ConfigValue parse_value(const std::string& raw, const std::string& origin,
                               int line) {
  ConfigValue v;
  v.line = line;
  const std::string s = trim(raw);
  if (s.empty())
    throw validation_error(origin + ":" + std::to_string(line) +
                           ": missing value after '='");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"' ||
        s.find('"', 1) != s.size() - 1)
      throw validation_error(origin + ":" + std::to_string(line) +
                             ": unterminated or embedded quote in string");
    v.kind = ConfigValue::Kind::text;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']')
      throw validation_error(origin + ":" + std::to_string(line) +
                             ": list must close with ']'");
    v.kind = ConfigValue::Kind::list;
    v.items = parse_number_csv(s.substr(1, s.size() - 2), origin, line, "list");
    return v;
  }
  if (s.front() == '(') {
    if (s.back() != ')')
      throw validation_error(origin + ":" + std::to_string(line) +
                             ": pair must close with ')'");
    const auto items =
        parse_number_csv(s.substr(1, s.size() - 2), origin, line, "pair");
    if (items.size() != 2)
      throw validation_error(origin + ":" + std::to_string(line) +
                             ": pair needs exactly two numbers");
    v.kind = ConfigValue::Kind::pair;
    v.point = Vec2{items[0], items[1]};
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.flag = s == "true";
    return v;
  }
  if (parse_number(s, v.num)) {
    v.kind = ConfigValue::Kind::number;
    return v;
  }
  if (is_identifier(s)) {
    v.kind = ConfigValue::Kind::ident;
    v.str = s;
    return v;
  }
  throw validation_error(origin + ":" + std::to_string(line) +
                         ": cannot parse value '" + s + "'");
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace config_detail

inline ConfigSection parse_config_text(const std::string& text,
                                       const std::string& origin) {
  ConfigSection root(origin, "", 0);
  std::vector<ConfigSection*> stack{&root};
  std::vector<int> open_lines{0};
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = config_detail::trim(config_detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line == "}") {
      if (stack.size() == 1)
        throw validation_error(origin + ":" + std::to_string(lineno) +
                               ": '}' without an open section");
      stack.pop_back();
      open_lines.pop_back();
      continue;
    }
    if (line.back() == '{') {
      const std::string name =
          config_detail::trim(line.substr(0, line.size() - 1));
      if (!config_detail::is_identifier(name))
        throw validation_error(origin + ":" + std::to_string(lineno) +
                               ": bad section name '" + name + "'");
      stack.push_back(&stack.back()->add_child(name, lineno));
      open_lines.push_back(lineno);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error(origin + ":" + std::to_string(lineno) +
                             ": expected 'key = value', 'name {', or '}'");
    const std::string key = config_detail::trim(line.substr(0, eq));
    if (!config_detail::is_identifier(key))
      throw validation_error(origin + ":" + std::to_string(lineno) +
                             ": bad field name '" + key + "'");
    stack.back()->add_value(
        key, config_detail::parse_value(line.substr(eq + 1), origin, lineno),
        lineno);
  }
  if (stack.size() != 1)
    throw validation_error(origin + ":" + std::to_string(open_lines.back()) +
                           ": section never closed");
  return root;
}

inline ConfigSection load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw validation_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

// Sampled coefficient grids come from CSV files with header x1,value (1D) or
// x1,x2,value (2D), one row per node of a complete uniform tensor grid.
inline TensorGrid load_grid_csv(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw validation_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw validation_error("csv: '" + path + "' is empty");
  const std::string expect = dim == 1 ? "x1,value" : "x1,x2,value";
  if (config_detail::trim(line) != expect)
    throw validation_error("csv: '" + path + "' header must be '" + expect + "'");
  std::vector<double> xs, ys, vals;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (config_detail::trim(line).empty()) continue;
    const auto cols =
        config_detail::parse_number_csv(line, path, row, "csv row");
    if (static_cast<int>(cols.size()) != dim + 1)
      throw validation_error("csv: " + path + ":" + std::to_string(row) +
                             ": expected " + std::to_string(dim + 1) + " columns");
    xs.push_back(cols[0]);
    ys.push_back(dim == 2 ? cols[1] : 0.0);
    vals.push_back(cols.back());
  }
  if (vals.size() < 2) throw validation_error("csv: '" + path + "' has no data");

  auto axis = [&](const std::vector<double>& c) {
    std::vector<double> u = c;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
  };
  const std::vector<double> ux = axis(xs);
  const std::vector<double> uy = dim == 2 ? axis(ys) : std::vector<double>{0.0};
  const int nx = static_cast<int>(ux.size());
  const int ny = static_cast<int>(uy.size());
  if (static_cast<std::size_t>(nx) * ny != vals.size())
    throw validation_error("csv: '" + path + "' rows do not form a tensor grid");
  auto uniform = [&](const std::vector<double>& u) {
    const double step = (u.back() - u.front()) / (u.size() - 1);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(u[i] - (u.front() + step * i)) > 1e-9 * std::max(1.0, std::abs(step)))
        throw validation_error("csv: '" + path + "' grid is not uniform");
    return step;
  };
  const double dx = uniform(ux);
  const double dy = dim == 2 ? uniform(uy) : 1.0;
  TensorGrid g = TensorGrid::make(dim, ux.front(), uy.front(), dx, dy, nx, ny);
  auto index = [](const std::vector<double>& u, double v) {
    const auto it = std::lower_bound(u.begin(), u.end(), v);
    return static_cast<int>(it - u.begin());
  };
  std::vector<bool> seen(vals.size(), false);
  for (std::size_t r = 0; r < vals.size(); ++r) {
    const int i = index(ux, xs[r]);
    const int j = dim == 2 ? index(uy, ys[r]) : 0;
    const std::size_t flat = static_cast<std::size_t>(j) * nx + i;
    if (seen[flat])
      throw validation_error("csv: '" + path + "' has duplicate grid nodes");
    seen[flat] = true;
    g.at(i, j) = vals[r];
  }
  return g;
}

struct StudySpec {
  std::string sweep;           // "h" or "n"
  std::vector<double> values;  // at least 3 points
  std::optional<Vec2> ball_center;
  double ball_radius = 0.0;
};

struct RunConfig {
  DirichletProblem problem;
  MeasureSolveOptions solve;
  TraceOptions trace;
  std::string trace_rho;  // expression for the global density handed to trace
  std::optional<Vec2> trace_sweep_x0;
  int trace_sweep_radii = 16;
  double verify_tol = 1e-4;
  int bank_degree = 2;
  double quad_h = 0.0;
  std::string reference;  // optional exact-solution expression for studies
  std::optional<StudySpec> study;
  std::string out_dir = "out";
  bool deterministic = false;
  std::uint64_t seed = 1;
  std::uint64_t config_hash = 0;  // content hash of the config text (cache key)
};

namespace config_detail {

inline ScalarField scalar_field(const ConfigValue& v, const std::string& where,
                                int dim) {
  if (v.kind == ConfigValue::Kind::number) return ScalarField::constant(v.num);
  if (v.kind == ConfigValue::Kind::text) {
    if (v.str.rfind("csv:", 0) == 0)
      return ScalarField::sampled(load_grid_csv(v.str.substr(4), dim));
    try {
      return ScalarField::closed_form(v.str);
    } catch (const validation_error& e) {
      throw validation_error(where + ": " + e.what());
    }
  }
  throw validation_error(where + ": expected a number, expression, or csv: path");
}

inline ScalarField scalar_or_const(const ConfigSection& s, const std::string& key,
                                   double def, int dim) {
  if (!s.has(key)) return ScalarField::constant(def);
  return scalar_field(s.raw(key), s.path() + "." + key, dim);
}

inline MollifierKind kernel_kind(const std::string& name,
                                 const std::string& where) {
  if (name == "standard_bump") return MollifierKind::standard_bump;
  if (name == "polynomial_bump") return MollifierKind::polynomial_bump;
  throw validation_error(where +
                         ": kernel must be standard_bump or polynomial_bump");
}

inline Domain domain_from(const ConfigSection& s) {
  s.reject_unknown({"kind", "center", "radius", "alpha", "beta"}, {"container"});
  const std::string kind = s.ident("kind");
  Domain inner = Domain::interval(0.0, 1.0);
  if (kind == "disk") {
    inner = Domain::disk(s.point_or("center", Vec2{0.0, 0.0}), s.number("radius"));
  } else if (kind == "interval") {
    inner = Domain::interval(s.number("alpha"), s.number("beta"));
  } else {
    throw validation_error(s.path() + ".kind: must be disk or interval");
  }
  if (const ConfigSection* c = s.child_if("container")) {
    c->reject_unknown({"center", "radius", "alpha", "beta"}, {});
    if (kind == "disk")
      return make_domain(inner, Domain::disk(c->point_or("center", inner.center()),
                                             c->number("radius")));
    return make_domain(inner,
                       Domain::interval(c->number("alpha"), c->number("beta")));
  }
  return inner;
}

inline CoefficientSet coefficients_from(const ConfigSection& s, int dim) {
  CoefficientSet cs = CoefficientSet::laplace(dim);
  if (dim == 1) {
    s.reject_unknown({"a", "b", "g", "h"}, {});
    cs.A = MatrixField::scalar_1d(scalar_or_const(s, "a", 1.0, 1));
    cs.b = VectorField(scalar_or_const(s, "b", 0.0, 1), ScalarField::constant(0.0));
    // scalar_1d pads a22 with 1 to keep the ellipticity bracket well posed;
    // the source block must instead stay identically zero off a11.
    cs.G = MatrixField::from_entries(scalar_or_const(s, "g", 0.0, 1),
                                     ScalarField::constant(0.0),
                                     ScalarField::constant(0.0));
    cs.h = VectorField(scalar_or_const(s, "h", 0.0, 1), ScalarField::constant(0.0));
    return cs;
  }
  s.reject_unknown(
      {"a11", "a12", "a22", "b1", "b2", "g11", "g12", "g22", "h1", "h2"}, {});
  cs.A = MatrixField::from_entries(scalar_or_const(s, "a11", 1.0, 2),
                                   scalar_or_const(s, "a12", 0.0, 2),
                                   scalar_or_const(s, "a22", 1.0, 2));
  cs.b = VectorField(scalar_or_const(s, "b1", 0.0, 2),
                     scalar_or_const(s, "b2", 0.0, 2));
  cs.G = MatrixField::from_entries(scalar_or_const(s, "g11", 0.0, 2),
                                   scalar_or_const(s, "g12", 0.0, 2),
                                   scalar_or_const(s, "g22", 0.0, 2));
  cs.h = VectorField(scalar_or_const(s, "h1", 0.0, 2),
                     scalar_or_const(s, "h2", 0.0, 2));
  return cs;
}

inline BoundaryMeasure measure_from(const ConfigSection& s, const Domain& d) {
  s.reject_unknown({"nodes", "density", "density_samples"}, {"atom"});
  const int nodes =
      static_cast<int>(s.integer_or("nodes", d.dim() == 1 ? 2 : 256));
  BoundaryMeasure mu = BoundaryMeasure::zero(d, nodes);
  if (s.has("density") && s.has("density_samples"))
    throw validation_error(s.path() +
                           ": give density or density_samples, not both");
  if (s.has("density")) {
    const ConfigValue& v = s.raw("density");
    if (v.kind == ConfigValue::Kind::number) {
      mu.set_density_constant(v.num);
    } else if (v.kind == ConfigValue::Kind::text) {
      // Expression in the boundary parameter, exposed as x1.
      Expr e = Expr::parse(v.str);
      mu.set_density_from([&e](double s_par) { return e(Vec2{s_par, 0.0}); });
    } else {
      throw validation_error(s.path() +
                             ".density: expected a number or expression");
    }
  }
  if (s.has("density_samples")) mu.set_density(s.list("density_samples"));
  for (const ConfigSection* a : s.children("atom")) {
    a->reject_unknown({"param", "weight"}, {});
    mu.add_atom(a->number("param"), a->number("weight"));
  }
  return mu;
}

}  // namespace config_detail

inline RunConfig build_run_config(const ConfigSection& root) {
  root.reject_unknown({}, {"problem", "solve", "trace", "verify", "study",
                           "output"});
  RunConfig cfg;

  const ConfigSection& prob = root.child("problem");
  prob.reject_unknown({"p"}, {"domain", "coefficients", "measure"});
  cfg.problem.domain = config_detail::domain_from(prob.child("domain"));
  const int dim = cfg.problem.domain.dim();
  cfg.problem.coeffs = prob.has_section("coefficients")
                           ? config_detail::coefficients_from(
                                 prob.child("coefficients"), dim)
                           : CoefficientSet::laplace(dim);
  cfg.problem.eta =
      prob.has_section("measure")
          ? config_detail::measure_from(prob.child("measure"), cfg.problem.domain)
          : BoundaryMeasure::zero(cfg.problem.domain, dim == 1 ? 2 : 256);
  cfg.problem.p = prob.number_or("p", 0.0);

  if (const ConfigSection* s = root.child_if("solve")) {
    s->reject_unknown({"h", "n_start", "n_max", "tol", "kernel", "jobs",
                       "cache_dir"},
                      {});
    cfg.solve.cache_dir = s->text_or("cache_dir", "");
    cfg.solve.mesh_h = s->number_or("h", cfg.solve.mesh_h);
    if (!(cfg.solve.mesh_h > 0.0))
      throw validation_error(s->path() + ".h: mesh size must be positive");
    cfg.solve.n_start = static_cast<int>(s->integer_or("n_start", 0));
    cfg.solve.n_max = static_cast<int>(s->integer_or("n_max", cfg.solve.n_max));
    cfg.solve.tol = s->number_or("tol", cfg.solve.tol);
    cfg.solve.kind = config_detail::kernel_kind(
        s->ident_or("kernel", "standard_bump"), s->path() + ".kernel");
    cfg.solve.jobs = static_cast<int>(s->integer_or("jobs", 1));
  }

  if (const ConfigSection* s = root.child_if("trace")) {
    s->reject_unknown({"rho", "levels", "nodes", "tol", "delta", "kernel",
                       "theta", "allow_signed", "with_residual", "bank_degree",
                       "quad_h"},
                      {"sweep"});
    cfg.trace_rho = s->text_or("rho", "");
    cfg.trace.levels = static_cast<int>(s->integer_or("levels", cfg.trace.levels));
    cfg.trace.nodes = static_cast<int>(s->integer_or("nodes", cfg.trace.nodes));
    cfg.trace.tol = s->number_or("tol", cfg.trace.tol);
    cfg.trace.delta = s->number_or("delta", 0.0);
    cfg.trace.kind = config_detail::kernel_kind(
        s->ident_or("kernel", "standard_bump"), s->path() + ".kernel");
    cfg.trace.theta = s->number_or("theta", 0.0);
    cfg.trace.allow_signed = s->flag_or("allow_signed", false);
    cfg.trace.with_residual = s->flag_or("with_residual", false);
    cfg.trace.bank_degree =
        static_cast<int>(s->integer_or("bank_degree", cfg.trace.bank_degree));
    cfg.trace.quad_h = s->number_or("quad_h", 0.0);
    if (const ConfigSection* sw = s->child_if("sweep")) {
      sw->reject_unknown({"x0", "radii"}, {});
      cfg.trace_sweep_x0 = sw->point_or("x0", Vec2{0.0, 0.0});
      cfg.trace_sweep_radii = static_cast<int>(sw->integer_or("radii", 16));
    }
  }

  if (const ConfigSection* s = root.child_if("verify")) {
    s->reject_unknown({"tol", "bank_degree", "quad_h", "reference"}, {});
    cfg.verify_tol = s->number_or("tol", cfg.verify_tol);
    cfg.bank_degree = static_cast<int>(s->integer_or("bank_degree", 2));
    cfg.quad_h = s->number_or("quad_h", 0.0);
    cfg.reference = s->text_or("reference", cfg.reference);
  }

  if (const ConfigSection* s = root.child_if("study")) {
    s->reject_unknown({"sweep", "values", "reference"}, {"ball"});
    StudySpec spec;
    spec.sweep = s->ident("sweep");
    if (spec.sweep != "h" && spec.sweep != "n")
      throw validation_error(s->path() + ".sweep: must be h or n");
    spec.values = s->list("values");
    if (s->has("reference")) cfg.reference = s->text("reference");
    if (const ConfigSection* b = s->child_if("ball")) {
      b->reject_unknown({"center", "radius"}, {});
      spec.ball_center = b->point("center");
      spec.ball_radius = b->number("radius");
      if (!(spec.ball_radius > 0.0))
        throw validation_error(b->path() + ".radius: must be positive");
    }
    cfg.study = std::move(spec);
  }

  if (const ConfigSection* s = root.child_if("output")) {
    s->reject_unknown({"dir", "deterministic", "seed"}, {});
    cfg.out_dir = s->text_or("dir", cfg.out_dir);
    cfg.deterministic = s->flag_or("deterministic", false);
    cfg.seed = static_cast<std::uint64_t>(s->integer_or("seed", 1));
  }
  return cfg;
}

inline std::uint64_t hash_bytes(const std::string& s) {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (unsigned char c : s) h = mix64(h ^ c);
  return h;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  RunConfig cfg = build_run_config(parse_config_text(text, path));
  cfg.config_hash = hash_bytes(text);
  cfg.solve.cache_key = cfg.config_hash;
  return cfg;
}

}  // namespace ddf
