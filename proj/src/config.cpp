#include "fermi1d/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fermi1d/inversion.hpp"
#include "fermi1d/representability.hpp"

namespace fermi1d {

using Json = nlohmann::json;

namespace {

using std::numbers::pi;

// Character iterator that records the offset of the last non-blank
// character read through it.
struct Cursor {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;
  const char* p;
  const char* begin;
  std::size_t* last;
  reference operator*() const {
    if (!std::isspace(static_cast<unsigned char>(*p))) *last = static_cast<std::size_t>(p - begin);
    return *p;
  }
  Cursor& operator++() {
    ++p;
    return *this;
  }
  Cursor operator++(int) {
    Cursor c = *this;
    ++p;
    return c;
  }
  bool operator==(const Cursor& o) const { return p == o.p; }
  bool operator!=(const Cursor& o) const { return p != o.p; }
};

// Line of every value in a JSON text, keyed by paths like "potential.deltas[0].position".
// The SAX pass reads through an iterator that remembers the last
// non-blank character handed to the lexer; at each event that is the last
// character of the token just read.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : text_(text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i)
      if (text[i] == '\n') starts_.push_back(i + 1);
  }

  int line_at(std::size_t offset) const {
    return static_cast<int>(std::upper_bound(starts_.begin(), starts_.end(), offset) - starts_.begin());
  }

  std::map<std::string, int> scan() const {

    struct Sax : nlohmann::json_sax<Json> {
      const LineIndex& idx;
      std::size_t last = 0;
      std::map<std::string, int> lines;
      struct Frame {
        bool array;
        std::string path;
        std::string key;
        std::size_t index = 0;
      };
      std::vector<Frame> stack;

      explicit Sax(const LineIndex& i) : idx(i) {}

      std::string child() const {
        if (stack.empty()) return "";
        const auto& f = stack.back();
        if (f.array) return f.path + "[" + std::to_string(f.index) + "]";
        return f.path.empty() ? f.key : f.path + "." + f.key;
      }
      // The value line wins over its key line.
      void mark() { lines[child()] = idx.line_at(last); }
      void advance() {
        if (!stack.empty() && stack.back().array) ++stack.back().index;
      }
      bool scalar() {
        mark();
        advance();
        return true;
      }
      bool null() override { return scalar(); }
      bool boolean(bool) override { return scalar(); }
      bool number_integer(number_integer_t) override { return scalar(); }
      bool number_unsigned(number_unsigned_t) override { return scalar(); }
      bool number_float(number_float_t, const string_t&) override { return scalar(); }
      bool string(string_t&) override { return scalar(); }
      bool binary(binary_t&) override { return scalar(); }
      bool start_object(std::size_t) override {
        mark();
        stack.push_back({false, child(), "", 0});
        return true;
      }
      bool key(string_t& k) override {
        stack.back().key = k;
        mark();
        return true;
      }
      bool end_object() override {
        stack.pop_back();
        advance();
        return true;
      }
      bool start_array(std::size_t) override {
        mark();
        stack.push_back({true, child(), "", 0});
        return true;
      }
      bool end_array() override {
        stack.pop_back();
        advance();
        return true;
      }
      bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }
    };

    Sax sax(*this);
    const char* b = text_.data();
    Cursor first{b, b, &sax.last}, end{b + text_.size(), b, &sax.last};
    Json::sax_parse(first, end, &sax);
    return sax.lines;
  }

 private:
  const std::string& text_;
  std::vector<std::size_t> starts_;
};

// Typed access with path-addressed errors.
class Reader {
 public:
  explicit Reader(const RunConfig& cfg) : cfg_(cfg) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const { throw cfg_.error(path, msg); }

  void allow_keys(const Json& obj, const std::string& path, std::set<std::string> keys) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!keys.count(it.key())) {
        std::string list;
        for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
        fail(join(path, it.key()), "unknown key (expected one of: " + list + ")");
      }
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  const Json& object(const Json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "must be an object");
    return j;
  }

  double number(const Json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
  }

  double positive(const Json& j, const std::string& path) const {
    const double x = number(j, path);
    if (!(x > 0)) fail(path, "must be positive");
    return x;
  }

  long long integer(const Json& j, const std::string& path, long long lo, long long hi) const {
    if (!j.is_number_integer()) fail(path, "must be an integer");
    const long long x = j.get<long long>();
    if (x < lo || x > hi) fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(x));
    return x;
  }

  bool boolean(const Json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "must be true or false");
    return j.get<bool>();
  }

  std::string string(const Json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "must be a string");
    return j.get<std::string>();
  }

  std::vector<double> numbers(const Json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<TrigTerm> terms(const Json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "must be an array of terms");
    std::vector<TrigTerm> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string p = path + "[" + std::to_string(i) + "]";
      object(j[i], p);
      allow_keys(j[i], p, {"type", "k", "amplitude"});
      TrigTerm t;
      if (!j[i].contains("type")) fail(p, "missing \"type\" (cos or sin)");
      t.type = string(j[i]["type"], p + ".type");
      if (t.type != "cos" && t.type != "sin") fail(p + ".type", "must be \"cos\" or \"sin\", got \"" + t.type + "\"");
      if (!j[i].contains("k")) fail(p, "missing \"k\"");
      t.k = static_cast<int>(integer(j[i]["k"], p + ".k", 0, 10000));
      t.amplitude = j[i].contains("amplitude") ? number(j[i]["amplitude"], p + ".amplitude") : 1.0;
      out.push_back(t);
    }
    return out;
  }

 private:
  const RunConfig& cfg_;
};

GridFunction sample_terms(const Grid& g, const std::vector<TrigTerm>& terms, double base) {
  return GridFunction::sample(g, [&](double x) {
    double s = base;
    for (const auto& t : terms) s += t.amplitude * (t.type == "cos" ? std::cos(2 * pi * t.k * x) : std::sin(2 * pi * t.k * x));
    return s;
  });
}

void parse_potential(const Reader& rd, const Json& j, RunConfig& cfg) {
  const std::string path = "potential";
  rd.object(j, path);
  rd.allow_keys(j, path, {"terms", "nodal", "deltas", "constant"});
  auto& p = cfg.potential;
  if (j.contains("terms")) p.terms = rd.terms(j["terms"], path + ".terms");
  if (j.contains("nodal")) {
    p.nodal = rd.numbers(j["nodal"], path + ".nodal");
    if (static_cast<int>(p.nodal.size()) != cfg.n + 1) {
      rd.fail(path + ".nodal", "needs n + 1 = " + std::to_string(cfg.n + 1) + " values, got " + std::to_string(p.nodal.size()));
    }
  }
  if (j.contains("deltas")) {
    const Json& d = j["deltas"];
    if (!d.is_array()) rd.fail(path + ".deltas", "must be an array of {position, weight}");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string q = path + ".deltas[" + std::to_string(i) + "]";
      rd.object(d[i], q);
      rd.allow_keys(d[i], q, {"position", "weight"});
      if (!d[i].contains("position") || !d[i].contains("weight")) rd.fail(q, "needs \"position\" and \"weight\"");
      const double x = rd.number(d[i]["position"], q + ".position");
      if (x < 0.0 || x > 1.0) {
        std::ostringstream os;
        os << "delta position must lie in [0, 1], got " << x;
        rd.fail(q + ".position", os.str());
      }
      p.deltas.push_back({x, rd.number(d[i]["weight"], q + ".weight")});
    }
  }
  if (j.contains("constant")) p.constant = rd.number(j["constant"], path + ".constant");
}

void parse_interaction(const Reader& rd, const Json& j, RunConfig& cfg) {
  const std::string path = "interaction";
  rd.object(j, path);
  rd.allow_keys(j, path, {"type", "strength", "width", "k", "samples", "values"});
  auto& w = cfg.interaction;
  if (!j.contains("type")) rd.fail(path, "missing \"type\"");
  w.type = rd.string(j["type"], path + ".type");
  static const std::set<std::string> kinds{"zero", "cosine", "gaussian", "soft_coulomb", "convolution", "general"};
  if (!kinds.count(w.type)) {
    rd.fail(path + ".type", "unknown interaction \"" + w.type +
                                "\" (expected zero, cosine, gaussian, soft_coulomb, convolution or general)");
  }
  if (j.contains("strength")) w.strength = rd.number(j["strength"], path + ".strength");
  if (j.contains("width")) w.width = rd.positive(j["width"], path + ".width");
  if (j.contains("k")) w.k = static_cast<int>(rd.integer(j["k"], path + ".k", 0, 10000));
  if (w.type == "convolution") {
    if (!j.contains("samples")) rd.fail(path, "convolution needs \"samples\"");
    w.samples = rd.numbers(j["samples"], path + ".samples");
  }
  if (w.type == "general") {
    if (!j.contains("values")) rd.fail(path, "general kernel needs \"values\"");
    const Json& v = j["values"];
    const std::string q = path + ".values";
    if (!v.is_array() || static_cast<int>(v.size()) != cfg.n + 1) rd.fail(q, "needs n + 1 = " + std::to_string(cfg.n + 1) + " rows");
    for (std::size_t i = 0; i < v.size(); ++i) {
      w.values.push_back(rd.numbers(v[i], q + "[" + std::to_string(i) + "]"));
      if (static_cast<int>(w.values.back().size()) != cfg.n + 1) {
        rd.fail(q + "[" + std::to_string(i) + "]", "needs n + 1 = " + std::to_string(cfg.n + 1) + " values");
      }
    }
  }
}

void parse_density(const Reader& rd, const Json& j, RunConfig& cfg) {
  const std::string path = "density";
  rd.object(j, path);
  rd.allow_keys(j, path, {"source", "values", "terms", "base"});
  auto& d = cfg.density;
  if (j.contains("source")) d.source = rd.string(j["source"], path + ".source");
  if (d.source != "potential" && d.source != "nodal" && d.source != "shape") {
    rd.fail(path + ".source", "must be \"potential\", \"nodal\" or \"shape\", got \"" + d.source + "\"");
  }
  if (d.source == "nodal") {
    if (!j.contains("values")) rd.fail(path, "nodal density needs \"values\"");
    d.values = rd.numbers(j["values"], path + ".values");
    if (static_cast<int>(d.values.size()) != cfg.n + 1) {
      rd.fail(path + ".values", "needs n + 1 = " + std::to_string(cfg.n + 1) + " values, got " + std::to_string(d.values.size()));
    }
    for (std::size_t i = 0; i < d.values.size(); ++i)
      if (d.values[i] < 0) rd.fail(path + ".values[" + std::to_string(i) + "]", "density values must be nonnegative");
  }
  if (d.source == "shape") {
    if (j.contains("terms")) d.terms = rd.terms(j["terms"], path + ".terms");
    if (j.contains("base")) d.base = rd.number(j["base"], path + ".base");
  }
}

void parse_tolerances(const Reader& rd, const Json& j, RunConfig& cfg) {
  const std::string path = "tolerances";
  rd.object(j, path);
  rd.allow_keys(j, path, {"grad_tol", "max_iters", "inner_tol", "scf_tol", "scf_max_iters", "mixing"});
  auto& t = cfg.tol;
  if (j.contains("grad_tol")) t.grad_tol = rd.positive(j["grad_tol"], path + ".grad_tol");
  if (j.contains("max_iters")) t.max_iters = static_cast<int>(rd.integer(j["max_iters"], path + ".max_iters", 0, 1000000));
  if (j.contains("inner_tol")) t.inner_tol = rd.positive(j["inner_tol"], path + ".inner_tol");
  if (j.contains("scf_tol")) t.scf_tol = rd.positive(j["scf_tol"], path + ".scf_tol");
  if (j.contains("scf_max_iters")) t.scf_max_iters = static_cast<int>(rd.integer(j["scf_max_iters"], path + ".scf_max_iters", 1, 1000000));
  if (j.contains("mixing")) {
    t.mixing = rd.number(j["mixing"], path + ".mixing");
    if (!(t.mixing > 0 && t.mixing <= 1)) rd.fail(path + ".mixing", "must lie in (0, 1]");
  }
}

}  // namespace

ConfigError RunConfig::error(const std::string& path, const std::string& msg) const {
  // Closest recorded prefix of the path.
  std::string p = path;
  int line = 0;
  for (;;) {
    auto it = lines.find(p);
    if (it != lines.end()) {
      line = it->second;
      break;
    }
    const auto cut = p.find_last_of(".[");
    if (cut == std::string::npos || p.empty()) break;
    p = p.substr(0, cut);
  }
  std::string where = source + ":" + (line > 0 ? std::to_string(line) + ":" : "");
  return ConfigError(where + " " + (path.empty() ? "" : path + ": ") + msg, line);
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  cfg.source = source;
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const LineIndex idx(text);
    const int line = idx.line_at(e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // Drop the library prefix "[json.exception.parse_error.101] ".
    if (auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + msg, line);
  }
  cfg.lines = LineIndex(text).scan();
  const Reader rd(cfg);
  rd.object(root, "");
  rd.allow_keys(root, "",
                {"comment", "n", "K", "N", "bc", "potential", "interaction", "density", "tolerances", "seed",
                 "allow_parity_violation", "output"});
  if (root.contains("n")) cfg.n = static_cast<int>(rd.integer(root["n"], "n", 2, 100000));
  if (root.contains("K")) cfg.K = static_cast<int>(rd.integer(root["K"], "K", 1, 64));
  if (root.contains("N")) cfg.N = static_cast<int>(rd.integer(root["N"], "N", 1, 64));
  if (root.contains("bc")) {
    try {
      cfg.bc = parse_boundary_condition(rd.string(root["bc"], "bc"));
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      rd.fail("bc", e.what());
    }
  }
  if (root.contains("potential")) parse_potential(rd, root["potential"], cfg);
  if (root.contains("interaction")) parse_interaction(rd, root["interaction"], cfg);
  if (root.contains("density")) parse_density(rd, root["density"], cfg);
  if (root.contains("tolerances")) parse_tolerances(rd, root["tolerances"], cfg);
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) rd.fail("seed", "must be a nonnegative integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("allow_parity_violation")) cfg.allow_parity_violation = rd.boolean(root["allow_parity_violation"], "allow_parity_violation");
  if (root.contains("output")) {
    rd.object(root["output"], "output");
    rd.allow_keys(root["output"], "output", {"csv"});
    if (root["output"].contains("csv")) cfg.csv = rd.string(root["output"]["csv"], "output.csv");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open configuration file", 0);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str(), path);
}

std::vector<std::string> check_parity(const RunConfig& cfg) {
  if (parity_ok(cfg.bc, cfg.N)) return {};
  const std::string msg = std::string(to_string(cfg.bc)) + " conditions need N " +
                          (cfg.bc == BoundaryCondition::Periodic ? "odd" : "even") + ", got " + std::to_string(cfg.N);
  if (!cfg.allow_parity_violation) throw cfg.error("N", msg + " (set allow_parity_violation to override)");
  return {msg + "; ground-state guarantees do not apply"};
}

Grid make_grid(const RunConfig& cfg) { return Grid(cfg.n); }

ExternalPotential make_potential(const RunConfig& cfg, const Grid& g) {
  GridFunction f = sample_terms(g, cfg.potential.terms, 0.0);
  if (!cfg.potential.nodal.empty()) {
    f = f + GridFunction(g, Eigen::Map<const Eigen::VectorXd>(cfg.potential.nodal.data(), cfg.potential.nodal.size()));
  }
  try {
    return ExternalPotential(f, cfg.potential.deltas, cfg.potential.constant);
  } catch (const ValidationError& e) {
    throw cfg.error("potential", e.what());
  }
}

Interaction make_interaction(const RunConfig& cfg, const Grid& g) {
  const auto& w = cfg.interaction;
  const int samples = 2 * g.n_cells() + 1;
  try {
    if (w.type == "zero") return Interaction::zero();
    if (w.type == "cosine") {
      return Interaction::convolution([&](double s) { return w.strength * std::cos(2 * pi * w.k * s); }, samples);
    }
    if (w.type == "gaussian") {
      return Interaction::convolution([&](double s) { return w.strength * std::exp(-s * s / (2 * w.width * w.width)); }, samples);
    }
    if (w.type == "soft_coulomb") {
      return Interaction::convolution([&](double s) { return w.strength / std::sqrt(s * s + w.width * w.width); }, samples);
    }
    if (w.type == "convolution") {
      return Interaction::convolution(Eigen::Map<const Eigen::VectorXd>(w.samples.data(), w.samples.size()));
    }
    Eigen::MatrixXd m(g.n_nodes(), g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i)
      for (int j = 0; j < g.n_nodes(); ++j) m(i, j) = w.values[i][j];
    return Interaction::general(g, std::move(m));
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw cfg.error("interaction", e.what());
  }
}

BasisPtr make_basis(const RunConfig& cfg, const Grid& g) {
  if (cfg.N > cfg.K) throw cfg.error("N", "N = " + std::to_string(cfg.N) + " exceeds the basis size K = " + std::to_string(cfg.K));
  try {
    return build_basis(cfg.bc, g, cfg.K);
  } catch (const ValidationError& e) {
    throw cfg.error("K", e.what());
  }
}

Density make_density(const RunConfig& cfg, const Grid& g) {
  const auto& d = cfg.density;
  try {
    if (d.source == "nodal") {
      return Density(GridFunction(g, Eigen::Map<const Eigen::VectorXd>(d.values.data(), d.values.size())), cfg.N);
    }
    if (d.source == "shape") return Density::normalized(sample_terms(g, d.terms, d.base), cfg.N);
  } catch (const ValidationError& e) {
    throw cfg.error("density", e.what());
  }
  const auto v = make_potential(cfg, g);
  const auto w = make_interaction(cfg, g);
  if (w.is_zero()) return Density(GridModel(g, cfg.bc, cfg.N).evaluate(v).density, cfg.N);
  return Density(GalerkinModel(make_basis(cfg, g), w, cfg.N).evaluate(v).density, cfg.N);
}

}  // namespace fermi1d
