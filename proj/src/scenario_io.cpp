#include "mzzb/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mzzb/error.hpp"

namespace mzzb {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? "/" : path, what);
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected a nonnegative integer");
  const auto v = j.get<long long>();
  if (v < 0) fail(path, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

Vec vector_of(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], path + "/" + std::to_string(i));
  return v;
}

std::vector<double> doubles(const json& j, const std::string& path) {
  const Vec v = vector_of(j, path);
  return {v.data(), v.data() + v.size()};
}

/// Exactly one key of a tagged-union object.
std::pair<std::string, const json*> tagged(const json& j, const std::string& path) {
  if (!j.is_object() || j.size() != 1) fail(path, "expected an object with exactly one variant key");
  return {j.begin().key(), &j.begin().value()};
}

/// Wraps model construction so validation failures point at the field.
template <class F>
auto at_field(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ModelError& e) {
    fail(path, e.what());
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
}

SignalMap signal_from(const json& j, const std::string& path) {
  const auto [kind, body] = tagged(j, path);
  const std::string p = path + "/" + kind;
  return at_field(p, [&, kind = kind, body = body] {
    if (kind == "linear_vector") {
      if (body->is_object()) {
        const double fill = number(require(*body, p, "fill"), p + "/fill");
        const std::size_t K = count(require(*body, p, "K"), p + "/K");
        return SignalMap::linear_vector(Vec::Constant(static_cast<Eigen::Index>(K), fill));
      }
      return SignalMap::linear_vector(vector_of(*body, p));
    }
    if (kind == "linear_matrix") {
      if (!body->is_array() || body->empty()) fail(p, "expected a nonempty array of rows");
      const Vec first = vector_of((*body)[0], p + "/0");
      Mat H(static_cast<Eigen::Index>(body->size()), first.size());
      for (std::size_t r = 0; r < body->size(); ++r) {
        const Vec row = vector_of((*body)[r], p + "/" + std::to_string(r));
        if (row.size() != first.size()) fail(p + "/" + std::to_string(r), "rows differ in length");
        H.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      return SignalMap::linear_matrix(H);
    }
    if (kind == "pulse") {
      return SignalMap::pulse(number(require(*body, p, "width"), p + "/width"), count(require(*body, p, "K"), p + "/K"));
    }
    fail(path, "unknown signal kind '" + kind + "' (linear_vector, linear_matrix, pulse)");
  });
}

Covariance covariance_from(const json& j, std::size_t K, const std::string& path) {
  return at_field(path, [&]() -> Covariance {
    if (j.is_array()) {
      if (j.size() != K) fail(path, "covariance must have " + std::to_string(K) + " rows");
      Mat m(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
      for (std::size_t r = 0; r < K; ++r) {
        const Vec row = vector_of(j[r], path + "/" + std::to_string(r));
        if (static_cast<std::size_t>(row.size()) != K) fail(path + "/" + std::to_string(r), "row has the wrong length");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      return Covariance::dense(m);
    }
    const auto [kind, body] = tagged(j, path);
    const std::string p = path + "/" + kind;
    if (kind == "scaled_identity") return Covariance::scaled_identity(K, number(*body, p));
    if (kind == "diagonal") {
      Vec d;
      if (body->is_object()) {
        const Vec ends = vector_of(require(*body, p, "linspace"), p + "/linspace");
        if (ends.size() != 2) fail(p + "/linspace", "expected [first, last]");
        d = Vec::LinSpaced(static_cast<Eigen::Index>(K), ends[0], ends[1]);
      } else {
        d = vector_of(*body, p);
      }
      if (static_cast<std::size_t>(d.size()) != K) fail(p, "diagonal must have " + std::to_string(K) + " entries");
      return Covariance::diagonal(d);
    }
    fail(path, "unknown covariance kind '" + kind + "' (array, scaled_identity, diagonal)");
  });
}

Vec mean_from(const json* j, std::size_t K, const std::string& path) {
  if (!j) return Vec::Zero(static_cast<Eigen::Index>(K));
  if (j->is_number()) return Vec::Constant(static_cast<Eigen::Index>(K), j->get<double>());
  Vec v = vector_of(*j, path);
  if (static_cast<std::size_t>(v.size()) != K) fail(path, "mean must have " + std::to_string(K) + " entries");
  return v;
}

const json* optional(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

GaussianLaw gaussian_from(const json& j, std::size_t K, const std::string& path) {
  return GaussianLaw{mean_from(optional(j, "mean"), K, path + "/mean"),
                     covariance_from(require(j, path, "cov"), K, path + "/cov")};
}

NoiseLaw noise_from(const json& j, std::size_t K, const std::string& path) {
  const auto [kind, body] = tagged(j, path);
  const std::string p = path + "/" + kind;
  return at_field(p, [&, kind = kind, body = body]() -> NoiseLaw {
    if (kind == "gaussian") {
      GaussianLaw g = gaussian_from(*body, K, p);
      return NoiseLaw::gaussian(g.mean, g.cov);
    }
    if (kind == "mixture") {
      const json& comps = require(*body, p, "components");
      if (!comps.is_array()) fail(p + "/components", "expected an array");
      std::vector<GaussianLaw> c;
      for (std::size_t i = 0; i < comps.size(); ++i) c.push_back(gaussian_from(comps[i], K, p + "/components/" + std::to_string(i)));
      return NoiseLaw::mixture(doubles(require(*body, p, "weights"), p + "/weights"), std::move(c));
    }
    if (kind == "sample_mixture") {
      const auto w = doubles(require(*body, p, "weights"), p + "/weights");
      const json* m = optional(*body, "means");
      return NoiseLaw::sample_mixture(w, m ? doubles(*m, p + "/means") : std::vector<double>(w.size(), 0.0),
                                      doubles(require(*body, p, "variances"), p + "/variances"), K);
    }
    fail(path, "unknown noise kind '" + kind + "' (gaussian, mixture, sample_mixture)");
  });
}

Prior prior_from(const json& j, const std::string& path) {
  const auto [kind, body] = tagged(j, path);
  const std::string p = path + "/" + kind;
  return at_field(p, [&, kind = kind, body = body]() -> Prior {
    if (kind == "uniform_interval") return Prior::uniform_interval(number(*body, p));
    if (kind == "uniform_box") {
      return Prior::uniform_box(vector_of(require(*body, p, "lo"), p + "/lo"), vector_of(require(*body, p, "hi"), p + "/hi"));
    }
    if (kind == "coordinates") {
      if (!body->is_array() || body->empty()) fail(p, "expected a nonempty array");
      std::vector<Prior::Marginal> m;
      for (std::size_t i = 0; i < body->size(); ++i) {
        const std::string pi = p + "/" + std::to_string(i);
        const auto [ck, cb] = tagged((*body)[i], pi);
        if (ck == "continuous") {
          const Vec b = vector_of(*cb, pi + "/continuous");
          if (b.size() != 2) fail(pi + "/continuous", "expected [lo, hi]");
          m.emplace_back(Prior::Continuous{b[0], b[1]});
        } else if (ck == "lattice") {
          m.emplace_back(Prior::Lattice{number(require(*cb, pi + "/lattice", "start"), pi + "/lattice/start"),
                                        number(require(*cb, pi + "/lattice", "step"), pi + "/lattice/step"),
                                        count(require(*cb, pi + "/lattice", "count"), pi + "/lattice/count")});
        } else {
          fail(pi, "unknown coordinate kind '" + ck + "' (continuous, lattice)");
        }
      }
      return Prior(std::move(m));
    }
    fail(path, "unknown prior kind '" + kind + "' (uniform_interval, uniform_box, coordinates)");
  });
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)), e.what());
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

bool is_sweep_config(const json& j) { return j.is_object() && j.contains("example"); }

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) fail("", "config must be a JSON object");
  const json& a = require(j, "", "assumed");
  const json& t = require(j, "", "true");
  SignalMap h = signal_from(require(a, "/assumed", "signal"), "/assumed/signal");
  const std::size_t K = h.output_dim();
  const json* ts = optional(t, "signal");
  SignalMap hs = ts ? signal_from(*ts, "/true/signal") : h;
  if (hs.output_dim() != K) fail("/true/signal", "true signal length differs from the assumed one");
  if (hs.param_dim() != h.param_dim()) fail("/true/signal", "true signal parameter dimension differs from the assumed one");
  Vec mu = mean_from(optional(a, "mu"), K, "/assumed/mu");
  Covariance sigma = covariance_from(require(a, "/assumed", "sigma"), K, "/assumed/sigma");
  NoiseLaw noise = noise_from(require(t, "/true", "noise"), K, "/true/noise");
  Prior prior = prior_from(require(j, "", "prior"), "/prior");
  if (prior.dim() != h.param_dim()) fail("/prior", "prior dimension differs from the signal parameter dimension");
  auto section = [&](const char* key) {
    const json* s = optional(j, key);
    if (s && !s->is_object()) fail(std::string("/") + key, "expected an object");
    return s ? *s : json::object();
  };
  return Scenario{AssumedModel(h, mu, sigma), TrueModel(hs, noise), prior, section("bound"), section("mc"), section("pe")};
}

SweepConfig sweep_from_json(const json& j) {
  SweepConfig c;
  const json& ex = require(j, "", "example");
  c.example = static_cast<int>(count(ex, "/example"));
  if (c.example < 1 || c.example > 4) fail("/example", "example must be 1, 2, 3 or 4");
  if (const json* v = optional(j, "sweep_var")) {
    if (!v->is_string()) fail("/sweep_var", "expected a string");
    c.sweep_var = v->get<std::string>();
  }
  if (const json* g = optional(j, "grid")) {
    if (!g->is_array()) fail("/grid", "expected an array of numbers");
    for (std::size_t i = 0; i < g->size(); ++i) c.grid.push_back(number((*g)[i], "/grid/" + std::to_string(i)));
    if (c.grid.empty()) fail("/grid", "sweep grid is empty");
    if (!std::is_sorted(c.grid.begin(), c.grid.end())) fail("/grid", "sweep grid must be sorted");
  } else {
    c.grid = default_grid(c.example);
  }
  if (const json* v = optional(j, "K")) c.K = count(*v, "/K");
  if (const json* v = optional(j, "trials")) c.trials = count(*v, "/trials");
  if (const json* v = optional(j, "T")) c.T = number(*v, "/T");
  if (const json* v = optional(j, "seed")) c.seed = count(*v, "/seed");
  if (const json* v = optional(j, "monte_carlo")) {
    if (!v->is_boolean()) fail("/monte_carlo", "expected true or false");
    c.monte_carlo = v->get<bool>();
  }
  return c;
}

}  // namespace mzzb
